#!/usr/bin/env python3
"""Convert PYPOWER/MATPOWER test cases into the eocs JSON case format.

Usage: python3 tools/matpower_to_case.py case39 data/case39.json
Requires the `pypower` package.
"""
import json
import sys

from pypower import api

# New England 39-bus machine transient reactances, 100 MVA base.
XD_39 = {30: 0.031, 31: 0.0697, 32: 0.0531, 33: 0.0436, 34: 0.132,
         35: 0.05, 36: 0.049, 37: 0.057, 38: 0.057, 39: 0.006}

# Branches modelled as transformers although MATPOWER stores tap = 0.
EXTRA_TRANSFORMERS = {"case118": {(86, 87)}}


def machine_rating(gen_row):
    return max(gen_row[8], 20.0)


def convert(case_name):
    case = getattr(api, case_name)()
    base = float(case["baseMVA"])
    bus_rows = case["bus"]
    index = {int(r[0]): i for i, r in enumerate(bus_rows)}
    kv = {int(r[0]): float(r[9]) for r in bus_rows}

    gen_buses = set()
    gens = []
    for g in case["gen"]:
        bus = int(g[0])
        rating = machine_rating(g)
        if case_name == "case39":
            xd = XD_39[bus]
            rating = max(float(g[8]), 1.0)
        else:
            xd = 0.25 * base / rating
        gens.append({"bus": index[bus], "x_d2": xd, "emf": 1.0,
                     "rated_mva": rating})
        gen_buses.add(bus)

    # Merge parallel circuits into one equivalent impedance.
    merged = {}
    order = []
    extra = EXTRA_TRANSFORMERS.get(case_name, set())
    for r in case["branch"]:
        f, t = int(r[0]), int(r[1])
        key = tuple(sorted((f, t)))
        z = complex(r[2], r[3])
        is_tx = r[8] != 0 or key in extra
        if key in merged:
            prev = merged[key]
            prev["z"] = prev["z"] * z / (prev["z"] + z)
            prev["tx"] = prev["tx"] or is_tx
        else:
            merged[key] = {"from": f, "to": t, "z": z, "tx": is_tx}
            order.append(key)

    degree = {b: 0 for b in kv}
    for key in order:
        degree[key[0]] += 1
        degree[key[1]] += 1

    kinds = {b: "plain" for b in kv}
    for key in order:
        br = merged[key]
        if not br["tx"]:
            continue
        f, t = br["from"], br["to"]
        if kv[f] != kv[t]:
            hi, lo = (f, t) if kv[f] > kv[t] else (t, f)
        else:
            hi, lo = (f, t) if degree[f] >= degree[t] else (t, f)
        if kinds[hi] == "plain":
            kinds[hi] = "xfmr_high"
        if kinds[lo] in ("plain", "xfmr_high"):
            kinds[lo] = "xfmr_low"
    for b in gen_buses:
        kinds[b] = "gen_terminal"

    buses = [{"id": index[int(r[0])], "kind": kinds[int(r[0])],
              "base_kV": float(r[9])} for r in bus_rows]
    branches = []
    for i, key in enumerate(order):
        br = merged[key]
        z = br["z"]
        if abs(z) == 0.0:
            z = complex(0.0, 1e-4)
        branches.append({
            "id": i,
            "from_bus": index[br["from"]],
            "to_bus": index[br["to"]],
            "z": [z.real, z.imag],
            "kind": "transformer" if br["tx"] else "line",
            "switchable": not br["tx"],
        })
    return {"name": "ieee" + case_name[4:], "base_mva": base, "buses": buses,
            "branches": branches, "sync_gens": gens, "renewables": []}


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    out = convert(sys.argv[1])
    with open(sys.argv[2], "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")
    lines = sum(1 for b in out["branches"] if b["kind"] == "line")
    print(f"{out['name']}: {len(out['buses'])} buses, {len(out['branches'])} "
          f"branches, {lines} lines, {len(out['sync_gens'])} generators")


if __name__ == "__main__":
    main()
