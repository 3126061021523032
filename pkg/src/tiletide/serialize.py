"""Lossless JSON encoding for the exact-geometry types and grid functions.

Rationals are encoded as {"num": ..., "den": ...} so round-trips are exact.
Grid functions use arrays of [re, im] pairs plus a CSV writer (x, re, im)
for plotting.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Dict, List, Sequence, TextIO

import numpy as np

from .grid import DyadicInterval, ModelFamilies, TileFamily, TriTile


def fraction_to_json(x: Fraction) -> Dict[str, int]:
    return {"num": x.numerator, "den": x.denominator}


def fraction_from_json(d: Dict[str, int]) -> Fraction:
    return Fraction(d["num"], d["den"])


def dyadic_to_json(iv: DyadicInterval) -> dict:
    return {
        "scale": iv.scale,
        "index": iv.index,
        "shift": fraction_to_json(iv.shift),
    }


def dyadic_from_json(d: dict) -> DyadicInterval:
    return DyadicInterval(d["scale"], d["index"], fraction_from_json(d["shift"]))


def tritile_to_json(t: TriTile) -> dict:
    return {
        "spatial": dyadic_to_json(t.spatial),
        "freqs": [dyadic_to_json(f) for f in t.freqs],
    }


def tritile_from_json(d: dict) -> TriTile:
    return TriTile(
        spatial=dyadic_from_json(d["spatial"]),
        freqs=tuple(dyadic_from_json(f) for f in d["freqs"]),
    )


def family_to_json(fam: TileFamily) -> dict:
    return {
        "shift": [fraction_to_json(s) for s in fam.shift],
        "members": [tritile_to_json(m) for m in fam.members],
    }


def family_from_json(d: dict) -> TileFamily:
    return TileFamily(
        members=tuple(tritile_from_json(m) for m in d["members"]),
        shift=tuple(fraction_from_json(s) for s in d["shift"]),
    )


def model_families_to_json(mf: ModelFamilies) -> dict:
    uid_of = {q: i for i, q in enumerate(mf.q_family.members)}
    params = dict(mf.parameters)
    for key in ("spatial_window", "frequency_window"):
        params[key] = [fraction_to_json(v) for v in params[key]]
    params["p_scales"] = list(params["p_scales"])
    return {
        "p_family": family_to_json(mf.p_family),
        "q_family": family_to_json(mf.q_family),
        "links": [
            [uid_of[q] for q in mf.links[p]] for p in mf.p_family.members
        ],
        "parameters": params,
    }


def model_families_from_json(d: dict) -> ModelFamilies:
    p_family = family_from_json(d["p_family"])
    q_family = family_from_json(d["q_family"])
    links = {
        p: tuple(q_family.members[i] for i in idxs)
        for p, idxs in zip(p_family.members, d["links"])
    }
    params = dict(d["parameters"])
    for key in ("spatial_window", "frequency_window"):
        params[key] = tuple(fraction_from_json(v) for v in params[key])
    params["p_scales"] = tuple(params["p_scales"])
    return ModelFamilies(p_family, q_family, links, params)


def grid_function_to_json(gf) -> dict:
    return {
        "origin": gf.origin,
        "spacing": gf.spacing,
        "samples": [[float(z.real), float(z.imag)] for z in gf.samples],
    }


def grid_function_from_json(d: dict):
    from .packets import GridFunction

    samples = np.array([complex(re, im) for re, im in d["samples"]])
    return GridFunction(samples=samples, origin=d["origin"], spacing=d["spacing"])


def grid_function_to_csv(gf, stream: TextIO) -> None:
    writer = csv.writer(stream)
    writer.writerow(["x", "re", "im"])
    for x, z in zip(gf.xs, gf.samples):
        writer.writerow([repr(float(x)), repr(float(z.real)), repr(float(z.imag))])


def dump_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
