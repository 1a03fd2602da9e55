import os
import sys
# Add engine root to path
ENGINE_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ENGINE_ROOT)
"""
Vérifications longues à pleine échelle (impulsions τ = 100, grilles 161×161).
Lancer depuis n'importe où : python scripts/run_long_checks.py [oracle nodes invariance shrinkage overlay parity]
Les sorties sont écrites dans engine/out/ ; les balayages de grille reprennent leurs checkpoints.
"""

import json
from pathlib import Path
from typing import Callable, Dict, List

from app.main import cli

OUT = Path("out")
CONFIGS = Path("configs")
GRID_SPACING = 2.4 / 160


def run(*args: str) -> int:
    print(f"→ pairspectra {' '.join(args)}")
    return cli.main(args=list(args), standalone_mode=False)


def report(name: str) -> Dict:
    return json.loads((OUT / name).read_text(encoding="utf-8"))


def close_to(values: List[float], targets: List[float], tol: float) -> bool:
    return len(values) == len(targets) and all(abs(a - b) <= tol for a, b in zip(sorted(values), sorted(targets)))


def check_oracle() -> bool:
    code = run("compare-oracle", str(CONFIGS / "oracle.yaml"))
    data = report("oracle.oracle.json")
    print(f"   écart relatif max {data['max_relative_deviation']:.3e}, "
          f"écart absolu (petits f) {data['max_absolute_deviation_small']:.3e}")
    return code == 0


def check_nodes() -> bool:
    if run("sweep", str(CONFIGS / "grid_strong.yaml")) != 0:
        return False
    run("analyze", str(OUT / "grid_strong.csv"))
    rings = {r["n_assigned"]: r for r in report("grid_strong.analysis.json")["grids"][0]["rings"]}
    expected = {8: [0.0, 0.4, -0.4, 0.8, -0.8], 7: [0.2, -0.2, 0.6, -0.6]}
    ok = True
    for n, qx in expected.items():
        ring = rings.get(n, {})
        print(f"   n={n} : {ring.get('node_count')} nœuds, qx={ring.get('node_qx')}")
        ok &= ring.get("node_count") == 2 * len(qx) and close_to(ring.get("node_qx", []), qx, GRID_SPACING)
    return ok


def check_invariance() -> bool:
    node_sets = []
    for tag in ("e01", "e02", "e03", "e04"):
        run("overlay", str(CONFIGS / f"ring_{tag}.yaml"))
        data = report(f"ring_{tag}.overlay.json")
        node_sets.append(data["dhw_node_qx"])
        print(f"   {tag} : r={data['radius']:.4f}, nœuds {data['dhw_node_qx']}")
    # pas d'échantillonnage le long du demi-anneau (361 points)
    tol = 3.1416 * max(report(f"ring_{t}.overlay.json")["radius"] for t in ("e01", "e04")) / 360
    return all(close_to(nodes, node_sets[0], tol) for nodes in node_sets[1:])


def check_shrinkage() -> bool:
    grids = []
    for tag in ("delta0", "delta05", "delta1"):
        if run("sweep", str(CONFIGS / f"grid_{tag}.yaml")) != 0:
            return False
        grids.append(str(OUT / f"grid_{tag}.csv"))
    run("analyze", *grids, "--output", str(OUT / "grid_delta.analysis.json"))
    data = report("grid_delta.analysis.json")
    radii = [g.get("smallest_ring_radius") for g in data["grids"]]
    trend = data.get("threshold_trend", {})
    print(f"   rayons minimaux {radii}, tendance {trend}")
    return (
        radii[0] is not None and abs(radii[0] - 0.628) <= 0.02
        and radii[2] is not None and abs(radii[2] - 0.568) <= 0.02
        and bool(trend.get("non_increasing"))
    )


def check_overlay() -> bool:
    ok = True
    for n in (6, 7, 8):
        code = run("overlay", str(CONFIGS / "ring_e01.yaml"), "--set", f"ring_scan.n={n}",
                   "--set", f"output.stem=overlay_n{n}")
        data = report(f"overlay_n{n}.overlay.json")
        print(f"   n={n} : nœuds {data['nodes_match']}, écarts {data['deviations']}, meilleur {data['best_variant']}")
        ok &= code == 0
    return ok


def check_parity() -> bool:
    peaks = {}
    for tag in ("q0_delta0", "qx05_delta0", "q0_delta1"):
        run("scan-freq", str(CONFIGS / f"freq_{tag}.yaml"), "--scale", "log")
        peaks[tag] = report(f"freq_{tag}.peaks.json")["peaks"]
        print(f"   {tag} : n = {[p['n_assigned'] for p in peaks[tag]]}, "
              f"interdits = {[p['n_assigned'] for p in peaks[tag] if p['suppressed']]}")
    q0 = [p["n_assigned"] for p in peaks["q0_delta0"]]
    circular_one = [p for p in peaks["q0_delta1"] if p["n_assigned"] == 1]
    return (
        bool(q0) and all(n % 2 == 1 for n in q0)
        and not any(p["suppressed"] for p in peaks["q0_delta0"])
        and any(p["n_assigned"] % 2 == 0 for p in peaks["qx05_delta0"])
        and bool(circular_one) and not circular_one[0]["suppressed"]
    )


CHECKS: Dict[str, Callable[[], bool]] = {
    "oracle": check_oracle,
    "nodes": check_nodes,
    "invariance": check_invariance,
    "shrinkage": check_shrinkage,
    "overlay": check_overlay,
    "parity": check_parity,
}


def main(selected: List[str]) -> int:
    os.chdir(ENGINE_ROOT)
    results = {}
    for name in selected or list(CHECKS):
        print(f"\n=== {name} ===")
        results[name] = CHECKS[name]()
        print("✅ OK" if results[name] else "❌ ÉCHEC")

    print("\n" + "\n".join(f"{'✅' if ok else '❌'} {name}" for name, ok in results.items()))
    return 0 if all(results.values()) else 3


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
