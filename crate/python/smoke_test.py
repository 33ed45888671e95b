"""Smoke test for the Python extension.

Build and install first:
    pip install --no-build-isolation ./crates/py
"""

import math
import sys

import bosecond_py as b


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    return ok


def main():
    results = []

    eq = b.equilibrium(3.0, 1.0)
    results.append(check(abs(eq["condensate"] - 1.364) < 1e-3, f"condensate {eq['condensate']:.6f}"))
    rel = abs(eq["condensate"] - eq["condensate_rounded_formula"]) / eq["condensate_rounded_formula"]
    results.append(check(rel < 1e-3, f"rounded formula within {rel:.1e}"))

    # hard-sphere W has a closed form
    w = b.kernel_w("hard_sphere", 1.0, 0.5, 0.7)
    closed = min(math.sqrt(v) for v in (1.0, 0.5, 0.7, 0.2)) / math.sqrt(1.0 * 0.5 * 0.7)
    results.append(check(abs(w - closed) < 1e-10, f"W(1, 0.5, 0.7) = {w:.12f}"))

    try:
        b.kernel_w("power", 1.0, 1.0, 1.0, eta=1.5, b0=0.1)
        results.append(check(False, "eta = 1.5 rejected"))
    except ValueError:
        results.append(check(True, "eta = 1.5 rejected"))

    ini = b.preset_config("no-condensation-demo")
    swaps = {"nodes": "24", "ratio": "1.5", "x_max": "8.0", "t_end_over_h": "1e-3", "experiment": "none"}
    lines = []
    for line in ini.splitlines():
        key = line.split(" = ")[0]
        lines.append(f"{key} = {swaps[key]}" if key in swaps else line)
    out = b.simulate("\n".join(lines))
    n = out["columns"].index("N")
    masses = [row[n] for row in out["rows"]]
    drift = max(abs(m - masses[0]) for m in masses) / masses[0]
    results.append(check(drift < 1e-9, f"{len(masses)} records, mass drift {drift:.1e}"))

    report = b.verify("kernel", seed=1, samples=200)
    hard = [c for c in report["checks"] if not c["passed"] and not c["advisory"]]
    results.append(check(not hard, f"kernel suite, {len(report['checks'])} checks"))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
