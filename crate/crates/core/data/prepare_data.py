"""Regenerate registry.jsonl and world.geojson from upstream npm packages.

Usage: python3 prepare_data.py SOURCE_DIR

SOURCE_DIR must hold the unpacked tarballs of world-countries 5.1.0,
@rapideditor/country-coder 5.6.1 and world-atlas 2.0.2, each extracted into
a directory named <package>-<version>/package/.
"""

import argparse
import json
from pathlib import Path

HERE = Path(__file__).resolve().parent

# Antarctic territories that world-countries files under "Antarctic".
REGION_FIXES = {"ATF": "Africa", "BVT": "Americas", "SGS": "Americas", "HMD": "Oceania"}


def build_registry(src):
    countries = json.loads((src / "world-countries-5.1.0/package/countries.json").read_text())
    borders = json.loads((src / "rapideditor-country-coder-5.6.1/package/src/data/borders.json").read_text())
    by_iso = {f["properties"]["iso1A3"]: f["properties"] for f in borders["features"] if f["properties"].get("iso1A3")}
    registry, numeric = [], {}
    for c in countries:
        iso = c["cca3"]
        if iso == "ATA":
            continue
        if iso == "UNK":
            iso = "XKX"
        lat, lon = c["latlng"]
        registry.append({
            "qid": by_iso[iso]["wikidata"],
            "iso3": iso,
            "region": REGION_FIXES.get(iso, c["region"]),
            "centroid": [round(lat, 4), round(lon, 4)],
            "name": c["name"]["common"],
        })
        if c.get("ccn3"):
            numeric[c["ccn3"]] = iso
    registry.sort(key=lambda r: r["iso3"])
    assert len({r["iso3"] for r in registry}) == len(registry)
    assert len({r["qid"] for r in registry}) == len(registry)
    return registry, numeric


def decode_arcs(topo):
    sx, sy = topo["transform"]["scale"]
    tx, ty = topo["transform"]["translate"]
    arcs = []
    for arc in topo["arcs"]:
        x = y = 0
        points = []
        for dx, dy in arc:
            x += dx
            y += dy
            points.append([x * sx + tx, y * sy + ty])
        arcs.append(points)
    return arcs


def ring(arcs, indices):
    # Coarsest rounding that still leaves a closed ring.
    for digits in (1, 2, 3):
        points = []
        for i in indices:
            arc = arcs[i] if i >= 0 else arcs[~i][::-1]
            arc = [[round(p[0], digits), round(p[1], digits)] for p in arc]
            points.extend(arc if not points else arc[1:])
        deduped = []
        for p in points:
            if not deduped or deduped[-1] != p:
                deduped.append(p)
        if len(deduped) >= 4:
            return deduped
    return deduped


def build_geometry(src, registry, numeric):
    topo = json.loads((src / "world-atlas-2.0.2/package/countries-50m.json").read_text())
    arcs = decode_arcs(topo)
    known = {r["iso3"] for r in registry}
    features = []
    for g in topo["objects"]["countries"]["geometries"]:
        iso = "XKX" if g["properties"]["name"] == "Kosovo" else numeric.get(g.get("id"))
        if iso not in known:
            continue
        if g["type"] == "Polygon":
            polygons = [g["arcs"]]
        elif g["type"] == "MultiPolygon":
            polygons = g["arcs"]
        else:
            continue
        coords = [[r for r in (ring(arcs, part) for part in poly) if len(r) >= 4] for poly in polygons]
        coords = [p for p in coords if p]
        if coords:
            features.append({
                "type": "Feature",
                "properties": {"iso3": iso},
                "geometry": {"type": "MultiPolygon", "coordinates": coords},
            })
    features.sort(key=lambda f: f["properties"]["iso3"])
    return {"type": "FeatureCollection", "features": features}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source_dir", type=Path)
    args = parser.parse_args()

    registry, numeric = build_registry(args.source_dir)
    with open(HERE / "registry.jsonl", "w", encoding="utf-8") as f:
        for r in registry:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")

    world = build_geometry(args.source_dir, registry, numeric)
    with open(HERE / "world.geojson", "w", encoding="utf-8") as f:
        json.dump(world, f, separators=(",", ":"))

    shaped = {f["properties"]["iso3"] for f in world["features"]}
    missing = sorted({r["iso3"] for r in registry} - shaped)
    print(f"{len(registry)} countries, {len(shaped)} outlines, no outline: {' '.join(missing)}")


if __name__ == "__main__":
    main()
