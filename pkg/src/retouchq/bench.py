"""Timing harness comparing the compiled colorimetry kernels with the
pure-numpy fallbacks on realistic image sizes."""

import time

import numpy as np

from ._kernels import _npimpl

operations = ("srgb_to_lab", "lab_to_srgb", "mean_lab_distance", "lab_histogram", "luminance")


def _load_compiled():
    try:
        from ._kernels import _cyext
        return _cyext
    except ImportError:
        return None


def _time_op(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmark(side: int = 256, repeats: int = 5, seed: int = 0) -> list[dict]:
    """Return one row per op: best-of-N wall time for each backend."""
    rng = np.random.default_rng(seed)
    img = rng.random((side, side, 3), dtype=np.float32)
    img2 = rng.random((side, side, 3), dtype=np.float32)
    lab = _npimpl.srgb_to_lab(img)

    compiled = _load_compiled()
    rows = []
    for name in operations:
        if name == "lab_to_srgb":
            args = (lab,)
        elif name == "mean_lab_distance":
            args = (img, img2)
        else:
            args = (img,)
        row = {"op": name, "numpy": _time_op(getattr(_npimpl, name), args, repeats)}
        if compiled is not None:
            row["compiled"] = _time_op(getattr(compiled, name), args, repeats)
        rows.append(row)

    # the optimizer update dominates training wall time, so compare it too;
    # roughly one dense layer's worth of parameters, independent of --side
    n = 1 << 22
    opt_args = (1e-4, 0.1, 0.001, 0.9, 0.999, 1e-8)
    row = {"op": f"adam_step ({n / 1e6:.1f}M params)"}
    for label, backend in (("numpy", _npimpl), ("compiled", compiled)):
        if backend is None:
            continue
        p = rng.standard_normal(n).astype(np.float32)
        m = np.zeros(n, dtype=np.float32)
        v = np.zeros(n, dtype=np.float32)
        g = rng.standard_normal(n).astype(np.float32)
        row[label] = _time_op(backend.adam_step, (p, m, v, g, *opt_args), repeats)
    rows.append(row)
    return rows


def format_rows(rows: list[dict], side: int) -> str:
    lines = [f"kernel timings on a {side}x{side}x3 image (best of repeats, ms)"]
    has_compiled = any("compiled" in r for r in rows)
    header = f"{'op':<26}{'numpy':>10}" + (f"{'compiled':>10}{'speedup':>9}" if has_compiled else "")
    lines.append(header)
    for r in rows:
        line = f"{r['op']:<26}{r['numpy'] * 1e3:>10.3f}"
        if "compiled" in r:
            speed = r["numpy"] / r["compiled"] if r["compiled"] > 0 else float("inf")
            line += f"{r['compiled'] * 1e3:>10.3f}{speed:>8.2f}x"
        lines.append(line)
    if not has_compiled:
        lines.append("(compiled extension not available; showing numpy backend only)")
    return "\n".join(lines)


def main(side: int = 256, repeats: int = 5) -> int:
    rows = run_benchmark(side=side, repeats=repeats)
    print(format_rows(rows, side))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
