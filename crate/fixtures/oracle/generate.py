"""Golden values for the numerical core, computed with mpmath.

Usage: python fixtures/oracle/generate.py [--grid GRID] [--out DIR]

Defaults: the grid next to this script, output into its parent directory.

Every derived double (shape parameters, linear IBO, logspace points) is
rounded to binary64 first and stored in the record, so the Rust side
evaluates at exactly the input the oracle saw.
"""

import argparse
import json
import math
from pathlib import Path

import mpmath as mp


def rytov_shapes(s2):
    p = s2 ** 1.2
    alpha = 1.0 / math.expm1(0.49 * s2 / (1.0 + 1.11 * p) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * s2 / (1.0 + 0.69 * p) ** (5.0 / 6.0))
    return alpha, beta


def zgrid(spec):
    if isinstance(spec, list):
        return [float(z) for z in spec]
    lo, hi, n = spec["logspace"]
    return [10.0 ** (lo + i * (hi - lo) / (n - 1)) for i in range(n)]


def shapes(entry):
    if "rytov" in entry:
        return rytov_shapes(entry["rytov"])
    return entry["alpha"], entry["beta"]


class Writer:
    def __init__(self, digits, dps):
        self.digits = digits
        self.dps = dps

    def record(self, kind, inputs, value):
        v = mp.mpf(value)
        if not mp.isfinite(v):
            raise SystemExit(f"non-finite value for {kind} {inputs}")
        return {
            "kind": kind,
            "inputs": inputs,
            "value": mp.nstr(v, self.digits, strip_zeros=False, min_fixed=1, max_fixed=0),
            "precision_digits": self.digits,
        }


def meijer(order, a, b, z):
    m = {"G20_02": 2, "G50_05": 5, "G51_15": 5}[order]
    n = 1 if order == "G51_15" else 0
    an, ap = [mp.mpf(x) for x in a[:n]], [mp.mpf(x) for x in a[n:]]
    bm, bq = [mp.mpf(x) for x in b[:m]], [mp.mpf(x) for x in b[m:]]
    return mp.meijerg([an, ap], [bm, bq], mp.mpf(z))


def gen_meijer(grid, w):
    out = []

    def push(order, a, b, z):
        try:
            v = meijer(order, a, b, z)
        except Exception as e:  # noqa: BLE001
            raise SystemExit(f"meijerg failed: {order} a={a} b={b} z={z}: {e}")
        out.append(w.record("meijer_g", {"order": order, "a": a, "b": b, "z": z}, v))

    g2 = grid["meijer_g20_02"]
    for a, b in g2["pairs"]:
        for z in g2["z"]:
            push("G20_02", [], [a, b], z)
    for entry in grid["meijer_g50_05"]:
        if "b" in entry:
            b = entry["b"]
        else:
            al, be = shapes(entry)
            b = [al / 2, (al + 1) / 2, be / 2, (be + 1) / 2, 0.0]
        for z in zgrid(entry["z"]):
            push("G50_05", [], b, z)
    for entry in grid["meijer_g51_15"]:
        al, be = shapes(entry)
        l0 = -(al + be) / 4
        b = [(al - be) / 4, (al - be + 2) / 4, (be - al) / 4, (be - al + 2) / 4, l0]
        for z in zgrid(entry["z"]):
            push("G51_15", [l0], b, z)
    return out


def gen_bessel(grid, w):
    g = grid["bessel_k"]
    return [
        w.record("bessel_k", {"nu": nu, "x": x}, mp.besselk(mp.mpf(nu), mp.mpf(x)))
        for nu in g["nu"]
        for x in g["x"]
    ]


def gg_density(alpha, beta, mean, x):
    a, b, x = mp.mpf(alpha), mp.mpf(beta), mp.mpf(x)
    mu = mp.mpf(mean) / ((1 + 1 / a) * (1 + 1 / b))
    ab = a * b
    return (
        ab ** ((a + b) / 2) / (mp.gamma(a) * mp.gamma(b) * x)
        * (x / mu) ** ((a + b) / 4)
        * mp.besselk(a - b, 2 * mp.sqrt(ab * mp.sqrt(x / mu)))
    )


def gen_gg(grid, w):
    out = []
    for entry in grid["gg_pdf"]:
        al, be = shapes(entry)
        for x in entry["x"]:
            inputs = {"alpha": al, "beta": be, "mean_snr": entry["mean_snr"], "x": x}
            out.append(w.record("gg_pdf", inputs, gg_density(al, be, entry["mean_snr"], x)))
    return out


def characteristic(model, ibo, phi0, u):
    if model == "sel":
        return min(u, mp.sqrt(ibo)), mp.mpf(0)
    d = ibo + u * u
    return ibo * u / d, phi0 * u * u / d


def bussgang(model, ibo, phi0):
    ibo, phi0 = mp.mpf(ibo), mp.mpf(phi0)
    # breakpoints past the SEL kink so tanh-sinh resolves the e^{-t} tail
    pts = sorted({mp.mpf(0), mp.mpf(60)} | {ibo + d for d in (0, 1, 5, 20, 60)}) + [mp.inf]

    def out(t):
        g, ph = characteristic(model, ibo, phi0, mp.sqrt(t))
        return g * mp.cos(ph), g * mp.sin(ph)

    def quad(f):
        # mp.quad stops at an absolute tolerance, so lift each piece to O(1)
        return mp.fsum(
            mp.exp(-a) * mp.quad(lambda t: f(t) * mp.exp(a), [a, b])
            for a, b in zip(pts[:-1], pts[1:])
        )

    re = quad(lambda t: mp.sqrt(t) * out(t)[0] * mp.exp(-t))
    im = quad(lambda t: mp.sqrt(t) * out(t)[1] * mp.exp(-t))
    delta = mp.sqrt(re * re + im * im)

    def dist(t):
        o = out(t)
        s = mp.sqrt(t)
        return ((o[0] - re * s) ** 2 + (o[1] - im * s) ** 2) * mp.exp(-t)

    return delta, quad(dist)


def gen_bussgang(grid, w):
    g = grid["bussgang"]
    out = []
    for model in g["models"]:
        for db in g["ibo_db"]:
            ibo = 10.0 ** (db / 10.0)
            delta, sd2 = bussgang(model, ibo, g["phi0"])
            base = {"model": model, "ibo": ibo, "phi0": g["phi0"]}
            out.append(w.record("bussgang", {**base, "quantity": "delta"}, delta))
            out.append(w.record("bussgang", {**base, "quantity": "sigma_d2"}, sd2))
    return out


def gen_jensen(grid, w):
    out = []
    for entry in grid["jensen_j"]:
        al, be = shapes(entry)
        mean = entry["mean_snr"]
        mu = mp.mpf(mean) / ((1 + 1 / mp.mpf(al)) * (1 + 1 / mp.mpf(be)))
        for s in entry["s"]:
            f = lambda x, s=s: x / (x + s) * gg_density(al, be, mean, x)  # noqa: E731
            v = mp.quad(f, [0, mu / 10, mu, 10 * mu, 100 * mu, mp.inf])
            inputs = {"alpha": al, "beta": be, "mean_snr": mean, "s": s}
            out.append(w.record("jensen_j", inputs, v))
    return out


def main():
    here = Path(__file__).resolve().parent
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=Path, default=here / "grid.json")
    ap.add_argument("--out", type=Path, default=here.parent)
    args = ap.parse_args()
    grid = json.loads(args.grid.read_text())
    mp.mp.dps = grid["dps"]
    w = Writer(grid["digits"], grid["dps"])
    files = {
        "meijer_g.json": gen_meijer,
        "bessel_k.json": gen_bessel,
        "gg_pdf.json": gen_gg,
        "bussgang.json": gen_bussgang,
        "jensen_j.json": gen_jensen,
    }
    args.out.mkdir(parents=True, exist_ok=True)
    for name, fn in files.items():
        recs = fn(grid, w)
        (args.out / name).write_text(json.dumps(recs, indent=1) + "\n")
        print(f"{name}: {len(recs)} records")


if __name__ == "__main__":
    main()
