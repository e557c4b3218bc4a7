"""Command-line orchestration: build operators, compute spectra, certify.

Subcommands: ``spectrum`` (singular values, fits, entropy sandwich to
CSV/JSON), ``certify`` (witness certificates for an operator and a
weighted ball), ``oracle`` (brute-force cross-check suite), ``rates`` (the
closed-form exponent catalogue), ``report`` (batch of spectra in one
file).  Exit codes: 0 ok, 1 oracle violation, 2 config error, 3 numerical
failure, 4 no witness found.  All outputs embed the tool version, a hash
of the configuration and the seed, and are byte-identical across runs for
a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, forward_ops, instability, nets, rates, seqspace, spectral

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NO_WITNESS = 4


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# --- configuration helpers ------------------------------------------------

def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(canon).hexdigest()[:16]


def run_metadata(cfg: dict, seed: int) -> dict:
    return {"version": __version__, "config_hash": config_hash(cfg), "seed": seed}


def _require(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"missing field {key!r} in {where}")
    return cfg[key]


def builtin_coefficient(spec: dict):
    """Named coefficient fields a(x, t) for the parabolic solver."""
    kind = _require(spec, "kind", "coefficient spec")
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        return lambda x, t: np.full_like(np.asarray(x, dtype=float), value)
    if kind == "trig_wave":
        # base + amp*sin(2*pi*fx*x)*cos(2*pi*ft*t)
        base = float(spec.get("base", 2.0))
        amp = float(spec.get("amp", 1.0))
        fx = float(spec.get("freq_x", 1.0))
        ft = float(spec.get("freq_t", 1.0))
        return lambda x, t: base + amp * np.sin(2 * np.pi * fx * np.asarray(x)) * math.cos(
            2 * np.pi * ft * t
        )
    if kind == "piecewise":
        breaks = np.asarray(_require(spec, "breaks", "piecewise coefficient"), dtype=float)
        values = np.asarray(_require(spec, "values", "piecewise coefficient"), dtype=float)
        if values.size != breaks.size + 1:
            raise ConfigError("piecewise coefficient needs len(values) == len(breaks)+1")
        return lambda x, t: values[np.searchsorted(breaks, np.asarray(x, dtype=float))]
    if kind == "tabulated":
        xs = np.asarray(_require(spec, "x", "tabulated coefficient"), dtype=float)
        ts = np.asarray(_require(spec, "t", "tabulated coefficient"), dtype=float)
        vals = np.asarray(_require(spec, "values", "tabulated coefficient"), dtype=float)
        if vals.shape != (ts.size, xs.size):
            raise ConfigError("tabulated coefficient needs values of shape (len(t), len(x))")

        def coeff(x, t):
            it = int(np.clip(np.searchsorted(ts, t), 0, ts.size - 1))
            return np.interp(np.asarray(x, dtype=float), xs, vals[it])

        return coeff
    raise ConfigError(f"unknown coefficient kind {kind!r}")


def builtin_potential(spec: dict | None):
    """Named radial/general potentials for the disk solver."""
    if spec is None or spec.get("kind", "zero") == "zero":
        return {}
    kind = spec["kind"]
    amp = float(spec.get("amplitude", 1.0))
    radius = float(spec.get("support_radius", 0.5))
    if kind == "radial_bump":

        def q(r):
            r = np.asarray(r, dtype=float)
            u = np.clip(r / radius, 0.0, None)
            out = np.zeros_like(u)
            inside = u < 1.0
            out[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
            return out

        return {"q_radial": q, "support_radius": radius, "sup_bound": abs(amp)}
    if kind == "angular_bump":
        m = int(spec.get("mode", 2))

        def qg(r, theta):
            r = np.asarray(r, dtype=float)
            u = np.clip(r / radius, 0.0, None)
            bump = np.zeros_like(u)
            inside = u < 1.0
            bump[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
            return amp * bump * (1.0 + 0.5 * np.cos(m * np.asarray(theta))) / 1.5

        return {"q_general": qg, "support_radius": radius, "sup_bound": abs(amp)}
    raise ConfigError(f"unknown potential kind {kind!r}")


def build_weights(spec: dict, J: int) -> seqspace.WeightSequence:
    kind = _require(spec, "kind", "weights spec")
    if kind == "custom" and "weights" in spec:
        return seqspace.WeightSequence(np.asarray(spec["weights"], dtype=float))
    return seqspace.make_weights(kind, spec.get("params", {}), J)


def build_operator(spec: dict) -> spectral.WeightedOperator:
    """Construct the forward operator described by a config block."""
    kind = _require(spec, "kind", "operator spec")
    if kind == "diagonal":
        if "scale" in spec:
            scale = np.asarray(spec["scale"], dtype=float)
        else:
            law = _require(spec, "law", "diagonal operator")
            J = int(_require(spec, "J", "diagonal operator"))
            j = np.arange(1, J + 1, dtype=float)
            if law == "exp":
                scale = np.exp(-float(spec.get("rate", 1.0)) * j)
            elif law == "poly":
                scale = j ** -float(spec.get("exponent", 1.0))
            else:
                raise ConfigError(f"unknown diagonal law {law!r}")
        return spectral.diagonal_operator_matrix(scale, label=f"diagonal({spec.get('law', 'scale')})")
    if kind == "heat":
        n_x = int(_require(spec, "n_x", "heat operator"))
        n_t = int(_require(spec, "n_t", "heat operator"))
        cfg = forward_ops.HeatConfig(
            n_x=n_x,
            h=1.0 / (n_x + 1),
            n_t=n_t,
            dt=1.0 / n_t if n_t else 0.0,
            coeff=builtin_coefficient(spec.get("coeff", {"kind": "constant", "value": 1.0})),
            lam=float(spec.get("lam", 0.25)),
        )
        return forward_ops.heat_propagator(cfg)
    if kind == "annulus":
        return forward_ops.annulus_restriction(
            float(_require(spec, "s", "annulus operator")),
            float(_require(spec, "r", "annulus operator")),
            int(_require(spec, "K", "annulus operator")),
            spec.get("domain_weights", "unit"),
            spec.get("codomain_weights", "unit"),
        )
    if kind == "dtn":
        pot = builtin_potential(spec.get("q"))
        cfg = forward_ops.DtnConfig(
            n_modes=int(_require(spec, "n_modes", "dtn operator")),
            n_r=int(_require(spec, "n_r", "dtn operator")),
            n_theta=int(spec.get("n_theta", 0)),
            **pot,
        )
        return forward_ops.disk_dtn(
            cfg,
            difference=bool(spec.get("difference", True)),
            weight_kind=spec.get("weight_kind", "unit"),
        )
    if kind == "radon":
        cfg = forward_ops.radon.uniform_radon_config(
            int(_require(spec, "n_pix", "radon operator")),
            int(_require(spec, "n_angles", "radon operator")),
            int(_require(spec, "n_offsets", "radon operator")),
        )
        sector = spec.get("remove_sector")
        if sector:
            cfg = forward_ops.remove_angular_sector(
                cfg, float(sector.get("start", 0.0)), float(_require(sector, "width", "sector"))
            )
        return forward_ops.radon_matrix(cfg)
    raise ConfigError(f"unknown operator kind {kind!r}")


# --- output helpers --------------------------------------------------------

def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, report: spectral.SpectrumReport, meta: dict) -> None:
    lines = [f"# version={meta['version']} config={meta['config_hash']} seed={meta['seed']}"]
    lines.append("k,sigma_k")
    for k, s in enumerate(report.sigmas, start=1):
        lines.append(f"{k},{s!r}")
    path.write_text("\n".join(lines) + "\n")


def _svg_log_plot(path: Path, points, title: str, meta: dict) -> None:
    """Minimal log-log polyline plot, no external assets."""
    pts = [(x, y) for x, y in points if x > 0 and y > 0]
    W, H, pad = 640, 480, 50
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f"<desc>version={meta['version']} config={meta['config_hash']} seed={meta['seed']}</desc>",
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
    ]
    if pts:
        lx = [math.log10(p[0]) for p in pts]
        ly = [math.log10(p[1]) for p in pts]
        x0, x1 = min(lx), max(lx)
        y0, y1 = min(ly), max(ly)
        sx = lambda v: pad + (W - 2 * pad) * ((v - x0) / (x1 - x0) if x1 > x0 else 0.5)
        sy = lambda v: H - pad - (H - 2 * pad) * ((v - y0) / (y1 - y0) if y1 > y0 else 0.5)
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(lx, ly))
        body.append(f'<polyline points="{coords}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    body.append("</svg>")
    path.write_text("\n".join(body) + "\n")


# --- subcommands ------------------------------------------------------------

def cmd_spectrum(cfg: dict, out: Path, seed: int, plot: bool) -> int:
    op = build_operator(_require(cfg, "operator", "config"))
    meta = run_metadata(cfg, seed)
    report = spectral.weighted_svd(op)
    fit_spec = cfg.get("fit")
    fit = None
    if fit_spec:
        rng = fit_spec.get("range", [1, report.n_resolved])
        fit = spectral.fit_decay(report.sigmas, (int(rng[0]), int(rng[1])), fit_spec["model"])
    carl = ()
    if cfg.get("carl"):
        carl = spectral.carl_table(report.sigmas, cfg["carl"], cfg.get("carl_scalar", "complex"))
    report = spectral.SpectrumReport(
        report.sigmas, report.n_resolved, report.label, fit, carl, meta=dict(meta)
    )
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "spectrum.csv", report, meta)
    _write_json(out / "spectrum.json", report.to_json_dict())
    if plot:
        pts = [(k, s) for k, s in enumerate(report.resolved(), start=1)]
        _svg_log_plot(out / "spectrum.svg", pts, report.label or "singular values", meta)
    print(f"spectrum: {report.sigmas.size} values ({report.n_resolved} resolved) -> {out}")
    return EXIT_OK


def cmd_certify(cfg: dict, out: Path, seed: int, plot: bool) -> int:
    op = build_operator(_require(cfg, "operator", "config"))
    meta = run_metadata(cfg, seed)
    kappa = build_weights(_require(cfg, "weights", "config"), op.domain.J)
    eps_list = _require(cfg, "eps", "config")
    method = cfg.get("method", "pigeonhole")
    budget = int(cfg.get("sample_budget", 10**4))
    K = instability.CompactSet(kappa, float(cfg.get("radius", 1.0)))
    certs, failures = [], []
    for eps in eps_list:
        try:
            if method == "pigeonhole":
                cert = instability.pigeonhole_witness(op, K, float(eps), sample_budget=budget)
            elif method == "spectral":
                cert = instability.spectral_witness(op, kappa, float(eps))
            else:
                raise ConfigError(f"unknown certify method {method!r}")
            certs.append(cert)
        except instability.WitnessSearchError as exc:
            failures.append({"eps": eps, "reason": str(exc), "diagnostics": exc.diagnostics})
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "meta": meta,
        "method": method,
        "certificates": [c.to_json_dict() for c in certs],
        "failures": failures,
    }
    _write_json(out / "certificates.json", payload)
    print("eps        image_distance")
    for c in certs:
        print(f"{c.eps:<10g} {c.image_distance:.6e}")
    for f in failures:
        print(f"{f['eps']:<10g} FAILED: {f['reason']}")
    if plot and certs:
        pts = sorted((c.image_distance, c.domain_distance) for c in certs)
        _svg_log_plot(out / "modulus.svg", pts, "modulus lower-bound witnesses", meta)
    if not certs:
        print("no instability found for any eps", file=sys.stderr)
        return EXIT_NO_WITNESS
    return EXIT_OK


def _oracle_checks(cfg: dict, seed: int) -> list:
    checks = []
    inject = bool(cfg.get("inject_fault"))

    # exact one-dimensional entropy/capacity values
    for k in (1, 2, 3):
        op = seqspace.DiagonalOperator(seqspace.unit_weights(1), seqspace.unit_weights(1))
        br = nets.entropy_bruteforce(op, k)
        exact = 2.0 ** -(k - 1)
        checks.append(
            {
                "name": f"entropy_exact_d1_k{k}",
                "passed": bool(br.lo <= exact <= br.hi and abs(br.hi - exact) < 1e-12),
                "detail": br.to_json_dict(),
            }
        )

    # entropy-capacity sandwich and real-exponent geometric-mean bracket, d <= 2
    for scale in ([1.0], [1.0, 0.5], [0.7, 0.3]):
        J = len(scale)
        op = seqspace.DiagonalOperator(
            seqspace.unit_weights(J), seqspace.unit_weights(J), np.asarray(scale)
        )
        for k in (1, 2, 3):
            ek = nets.entropy_bruteforce(op, k)
            ck = nets.capacity_bruteforce(op, k)
            tol = 0.05
            sandwich = (
                ck.hi <= ek.hi * (1 + tol)
                and ck.lo >= ek.lo / 2.0 * (1 - tol) - tol * ek.hi
            )
            sig = op.singular_values()
            if inject and k == 2 and J == 2:
                sig = sig * np.array([1.0, 10.0])  # fault injection for testing
            lo, hi = spectral.carl_sandwich(sig, k, scalar="real")
            hi = 6.0 * spectral.carl_sandwich(sig, k, scalar="complex")[0]
            consistent = ek.hi >= lo * (1 - 1e-9) and ek.lo <= hi * (1 + 1e-9)
            checks.append(
                {
                    "name": f"sandwich_d{J}_k{k}_scale{scale}",
                    "passed": bool(sandwich),
                    "detail": {"entropy": ek.to_json_dict(), "capacity": ck.to_json_dict()},
                }
            )
            checks.append(
                {
                    "name": f"carl_bracket_d{J}_k{k}_scale{scale}"
                    + ("_faulted" if inject and k == 2 and J == 2 else ""),
                    "passed": bool(consistent),
                    "detail": {
                        "violated": None
                        if consistent
                        else "lo <= e_k <= 6*lo (geometric-mean entropy bracket)",
                        "lo": lo,
                        "hi": hi,
                        "bracket": ek.to_json_dict(),
                    },
                }
            )

    # embedding exactness
    dom = seqspace.make_weights("sobolev", {"s": 1, "n": 1}, 256)
    cod = seqspace.make_weights("sobolev", {"s": 0, "n": 1}, 256)
    vals = seqspace.embedding_singular_values(dom, cod)
    kk = np.arange(1, 257, dtype=float)
    checks.append(
        {
            "name": "sobolev_embedding_exact",
            "passed": bool(np.max(np.abs(vals - kk**-1.0) / kk**-1.0) < 1e-12),
            "detail": {"J": 256},
        }
    )

    # additive/multiplicative singular value inequalities on random pairs
    rng = np.random.default_rng(seed)
    w16 = seqspace.unit_weights(16)
    violations = 0
    for _ in range(30):
        a = spectral.WeightedOperator(rng.standard_normal((16, 16)), w16, w16)
        b = spectral.WeightedOperator(rng.standard_normal((16, 16)), w16, w16)
        violations += len(spectral.weyl_checks(a, b))
    checks.append(
        {
            "name": "weyl_inequalities_random16",
            "passed": violations == 0,
            "detail": {"pairs": 30, "violations": violations},
        }
    )

    # greedy packing post-verification
    pts = rng.uniform(-1, 1, size=(200, 2))
    cloud = nets.PointCloud(pts)
    sel = nets.greedy_discrete(cloud, 0.5)
    dmat = cloud.distance_matrix()
    sub = dmat[np.ix_(sel, sel)]
    pairwise_ok = bool(np.all(sub[np.triu_indices(sel.size, 1)] >= 0.5 - 1e-12))
    covering_ok = bool(np.all(np.min(dmat[:, sel], axis=1) <= 0.5 + 1e-12))
    checks.append(
        {
            "name": "greedy_discrete_maximality",
            "passed": pairwise_ok and covering_ok,
            "detail": {"selected": int(sel.size)},
        }
    )
    return checks


def cmd_oracle(cfg: dict, out: Path, seed: int) -> int:
    checks = _oracle_checks(cfg, seed)
    meta = run_metadata(cfg, seed)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "oracle.json", {"meta": meta, "checks": checks})
    failed = [c for c in checks if not c["passed"]]
    for c in checks:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
        if not c["passed"] and c["detail"].get("violated"):
            print(f"       violated: {c['detail']['violated']}")
    return EXIT_ORACLE if failed else EXIT_OK


def cmd_rates(out: Path | None) -> int:
    catalogue = rates.exponent_catalogue()
    text = json.dumps(catalogue, sort_keys=True, indent=2)
    print(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "rates.json").write_text(text + "\n")
    return EXIT_OK


def cmd_report(cfg: dict, out: Path, seed: int) -> int:
    meta = run_metadata(cfg, seed)
    blocks = []
    for i, op_spec in enumerate(_require(cfg, "operators", "report config")):
        op = build_operator(op_spec)
        rep = spectral.weighted_svd(op)
        blocks.append(
            {
                "index": i,
                "label": rep.label,
                "n_resolved": rep.n_resolved,
                "sigma_head": rep.sigmas[: min(16, rep.sigmas.size)].tolist(),
            }
        )
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", {"meta": meta, "exponents": rates.exponent_catalogue(), "spectra": blocks})
    print(f"report: {len(blocks)} operators -> {out / 'report.json'}")
    return EXIT_OK


# --- entry point -------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="illposed", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "certify", "oracle", "rates", "report"):
        p = sub.add_parser(name)
        if name != "rates":
            p.add_argument("--config", required=name != "oracle", help="JSON run configuration")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        if name in ("spectrum", "certify"):
            p.add_argument("--plot", action="store_true", help="also write an SVG log plot")
    args = parser.parse_args(argv)

    try:
        if args.command == "rates":
            return cmd_rates(Path(args.out) if args.out else None)
        cfg = load_config(args.config) if getattr(args, "config", None) else {}
        seed = int(cfg.get("seed", args.seed))
        out = Path(args.out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out, seed, args.plot)
        if args.command == "certify":
            return cmd_certify(cfg, out, seed, args.plot)
        if args.command == "oracle":
            return cmd_oracle(cfg, out, seed)
        if args.command == "report":
            return cmd_report(cfg, out, seed)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, seqspace.WeightError, rates.RateError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        forward_ops.HeatError,
        forward_ops.DtnError,
        forward_ops.RadonError,
        spectral.SpectralError,
        nets.NetError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
