"""Command-line front end: sweeps, data files, and verification suites.

Output conventions: CSV with '#'-prefixed metadata header echoing every
effective parameter; JSON for nested reports; manifests are line-oriented
``key = value`` with '#' comments.  Exit codes: 0 success, 1 validation
error, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from typing import Dict, List, Optional, Sequence, TextIO

import numpy as np

from . import atomic, continuum, tightbinding, zak
from .errors import NoEdgeState, ZZEdgeError
from .lattice import spectral_window

FLOAT_FMT = "%.12g"


# ---------------------------------------------------------------- output


def _open_out(path: Optional[str]):
    """Returns (stream, should_close); '-'/empty means standard output."""
    if not path or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w"), True
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc


class _IOFailure(Exception):
    pass


def _write_csv(path: Optional[str], params: Dict, columns: Sequence[str], rows) -> None:
    out, close = _open_out(path)
    try:
        for k, v in params.items():
            out.write(f"# {k} = {v}\n")
        out.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for c in row:
                if isinstance(c, float):
                    cells.append(FLOAT_FMT % c)
                else:
                    cells.append(str(c))
            out.write(",".join(cells) + "\n")
    finally:
        if close:
            out.close()


def _write_json(path: Optional[str], payload: Dict) -> None:
    out, close = _open_out(path)
    try:
        json.dump(payload, out, indent=2, sort_keys=True)
        out.write("\n")
    finally:
        if close:
            out.close()


# ---------------------------------------------------------------- commands


def cmd_bands(args) -> int:
    if args.kpar_steps < 1:
        raise ValueError("--kpar-steps must be >= 1")
    if args.kpar_steps == 1:
        kpars = [args.kpar_min]
    else:
        kpars = np.linspace(args.kpar_min, args.kpar_max, args.kpar_steps)
    table = tightbinding.band_sweep(kpars, args.ncells)
    rows = []
    for pt in table:
        for idx in range(len(pt.eigenvalues)):
            rows.append((pt.kpar, idx, float(pt.eigenvalues[idx]),
                         pt.flags[idx], float(pt.left_mass[idx])))
    _write_csv(args.out, {
        "command": "bands", "kpar_min": args.kpar_min, "kpar_max": args.kpar_max,
        "kpar_steps": args.kpar_steps, "ncells": args.ncells,
    }, ["kpar", "index", "eigenvalue", "edge_flag", "left_mass_fraction"], rows)
    return 0


def cmd_edge_state(args) -> int:
    window = spectral_window(args.kpar)
    state = tightbinding.flat_band_state(window, args.ncells)
    rows = [(n, float(state.amplitudes[n, 0].real), float(state.amplitudes[n, 0].imag),
             float(abs(state.amplitudes[n, 0])))
            for n in range(args.ncells)]
    _write_csv(args.out, {
        "command": "edge-state", "kpar": args.kpar, "ncells": args.ncells,
        "zeta_abs": abs(window.zeta), "norm": state.norm,
    }, ["n", "re_psiA", "im_psiA", "abs_psiA"], rows)
    return 0


def cmd_zak(args) -> int:
    kpars = np.linspace(0.0, 2.0 * math.pi, args.kpar_steps)
    rows = []
    for kp in kpars:
        window = spectral_window(float(kp))
        if window.dgap <= 1e-6:
            continue  # skip unresolvable Dirac neighborhoods
        res = zak.zak_phase(window, args.npoints)
        rows.append((float(kp), res.phase, res.winding))
    _write_csv(args.out, {
        "command": "zak", "kpar_steps": args.kpar_steps, "npoints": args.npoints,
    }, ["kpar", "phase", "winding"], rows)
    return 0


def _parse_lambdas(text: str) -> List[float]:
    vals = [float(t) for t in text.split(",") if t.strip()]
    if not vals or any(v <= 0 for v in vals):
        raise ValueError("lambda list must be positive numbers")
    return vals


def cmd_atomic(args) -> int:
    well = atomic.AtomicWell(shape=args.shape, r0=args.r0)
    lams = _parse_lambdas(args.lambdas)
    hop_rows = []
    logs = []
    for lam in lams:
        gs = atomic.ground_state(well, lam)
        hc = atomic.hopping_rho(gs, well)
        logs.append(math.log(hc.rho))
        hop_rows.append((lam, gs.E0, hc.rho, hc.quadrature_error_estimate, gs.decay_rate))
        if args.profile_out:
            stride = max(1, len(gs.r) // 2000)
            _write_csv(args.profile_out % lam if "%" in args.profile_out
                       else args.profile_out, {
                "command": "atomic-profile", "lambda": lam, "shape": args.shape,
                "r0": args.r0, "E0": gs.E0,
            }, ["r", "p0"], [(float(r), float(p)) for r, p in
                             zip(gs.r[::stride], gs.p0[::stride])])
    slope = float(np.polyfit(lams, logs, 1)[0]) if len(lams) >= 2 else float("nan")
    _write_csv(args.out, {
        "command": "atomic", "shape": args.shape, "r0": args.r0,
        "lambdas": args.lambdas, "log_rho_slope": slope,
    }, ["lambda", "E0", "rho", "rho_quadrature_error", "p0_decay_rate"], hop_rows)
    return 0


def _continuum_run(well, gs, lam, kpar, ncells, points, pad, nev) -> Dict:
    grid = continuum.build_grid(ncells, (points, points), pad)
    prob = continuum.assemble_fiber(grid, well, gs, lam, kpar)
    basis = continuum.orbital_basis(prob)
    hc = atomic.hopping_rho(gs, well)
    sol = continuum.edge_eigensolve(prob, gs, basis.rho_grid, nev,
                                    e0_offset=basis.e0_grid)
    zeta = 1.0 + cmath.exp(1j * kpar)
    ansatz = np.zeros(grid.npoints, dtype=complex)
    for n in range(ncells):
        ansatz += (-zeta) ** n * basis.vectors[2 * n]
    ansatz /= np.linalg.norm(ansatz)
    entries = []
    for se, vec, flag in sol:
        entries.append({
            "E": se.E, "omega_tilde": se.omega_tilde, "edge_flag": bool(flag),
            "ansatz_overlap": float(abs(np.vdot(ansatz, vec))),
        })
    window = spectral_window(kpar)
    tb_evals, _ = tightbinding.spectrum(tightbinding.build_fiber(window, ncells))
    compare = continuum.scaled_spectrum_compare([s for s, _, _ in sol], tb_evals)
    return {
        "lambda": lam, "kpar": kpar, "ncells": ncells, "points_per_cell": points,
        "pad_left": pad, "nev": nev, "E0": gs.E0, "rho_quadrature": hc.rho,
        "rho_grid": basis.rho_grid, "e0_grid_offset": basis.e0_grid,
        "gram_offdiagonal_max": float(np.abs(basis.gram - np.eye(2 * ncells)).max()),
        "states": entries, "hausdorff_vs_tb": compare["hausdorff"],
    }


def cmd_continuum(args) -> int:
    well = atomic.AtomicWell(shape=args.shape, r0=args.r0)
    gs = atomic.ground_state(well, args.lam)
    report = _continuum_run(well, gs, args.lam, args.kpar, args.ncells,
                            args.points, args.pad_left, args.nev)
    _write_json(args.out, report)
    return 0


def _read_manifest(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"manifest line without '=': {line!r}")
                k, v = line.split("=", 1)
                out[k.strip()] = v.strip()
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    return out


def cmd_converge(args) -> int:
    man = _read_manifest(args.manifest)
    shape = man.get("well_shape", "disc")
    r0 = float(man.get("r0", atomic.DEFAULT_R0))
    lams = _parse_lambdas(man.get("lambdas", "8,12,16"))
    kpars = [float(t) for t in man.get("kpars", str(5 * math.pi / 6)).split(",")]
    ncells = int(man.get("ncells", 8))
    points = int(man.get("points_per_cell", 24))
    pad = int(man.get("pad_left", 2))
    nev = int(man.get("nev", 2 * ncells))
    well = atomic.AtomicWell(shape=shape, r0=r0)

    report: Dict = {"manifest": man, "runs": [], "verdicts": {}}
    failed = False
    per_kpar: Dict[float, List[Dict]] = {k: [] for k in kpars}
    for lam in lams:
        gs = atomic.ground_state(well, lam)
        for kp in kpars:
            try:
                run = _continuum_run(well, gs, lam, kp, ncells, points, pad, nev)
            except ZZEdgeError as exc:
                report["runs"].append({"lambda": lam, "kpar": kp,
                                       "error": f"{type(exc).__name__}: {exc}"})
                failed = True
                continue
            edge = [s for s in run["states"] if s["edge_flag"]]
            run["edge_state"] = edge[0] if edge else None
            if not edge:
                run["note"] = "no edge-flagged state"
            report["runs"].append(run)
            per_kpar[kp].append(run)
    for kp, runs in per_kpar.items():
        oms = [abs(r["edge_state"]["omega_tilde"]) for r in runs if r.get("edge_state")]
        haus = [r["hausdorff_vs_tb"] for r in runs]
        report["verdicts"][f"kpar={kp:.6g}"] = {
            "edge_state_present_at_all_lambdas": len(oms) == len(runs) and bool(runs),
            "abs_omega_tilde": oms,
            "abs_omega_tilde_strictly_decreasing":
                all(a > b for a, b in zip(oms, oms[1:])) and len(oms) >= 2,
            "hausdorff": haus,
            "hausdorff_strictly_decreasing":
                all(a > b for a, b in zip(haus, haus[1:])) and len(haus) >= 2,
        }
    _write_json(args.out, report)
    return 2 if failed else 0


# ---------------------------------------------------------------- verify


def _verify_tb() -> List[Dict]:
    checks = []
    rng = np.random.default_rng(7)
    # transfer-matrix laws on seeded samples
    ok, worst = True, 0.0
    for _ in range(50):
        kp = rng.uniform(0, 2 * math.pi)
        if abs(kp - math.pi) < 1e-3:
            continue
        z = complex(rng.normal(), rng.normal())
        ts = tightbinding.transfer_system(z, spectral_window(kp))
        zeta = ts.window.zeta
        for lam in (ts.lam1, ts.lam2):
            r = abs(np.conj(zeta) * lam * lam
                    + (1 + abs(zeta) ** 2 - z * z) * lam + zeta)
            worst = max(worst, r)
        ok &= abs(abs(ts.lam1 * ts.lam2) - 1) < 1e-12
    checks.append({"name": "transfer quadratic + unit product", "ok": bool(ok and worst < 1e-9),
                   "detail": f"worst quadratic residual {worst:.3e}"})
    # resolvent vs dense oracle
    N, kp = 80, 5 * math.pi / 6
    window = spectral_window(kp)
    op = tightbinding.build_fiber(window, N)
    err = 0.0
    for z in (0.25, 0.25 + 0.3j, 2.2):
        f = np.zeros((N, 2), complex)
        f[: N // 2] = rng.normal(size=(N // 2, 2)) + 1j * rng.normal(size=(N // 2, 2))
        psi = tightbinding.resolve(f, z, window, N)
        dense = np.linalg.solve(op.matrix - z * np.eye(2 * N), f.reshape(-1)).reshape(N, 2)
        err = max(err, float(np.linalg.norm((psi - dense)[: N // 2])
                             / np.linalg.norm(dense[: N // 2])))
    checks.append({"name": "transfer resolvent vs dense LU", "ok": err < 1e-8,
                   "detail": f"max relative error {err:.3e}"})
    # flat band eigenstate
    evals, evecs = tightbinding.spectrum(op)
    evals2, _, flags, _ = tightbinding.classify_modes(op, evals, evecs)
    nleft = sum(1 for e, fl in zip(evals2, flags) if fl == "left" and abs(e) < 1e-10)
    checks.append({"name": "single left-edge zero mode", "ok": nleft == 1,
                   "detail": f"count {nleft}"})
    return checks


def _verify_zak() -> List[Dict]:
    checks = []
    agree = True
    for kp in np.linspace(0.05, 2 * math.pi - 0.05, 41):
        window = spectral_window(float(kp))
        if window.dgap < 1e-3:
            continue
        res = zak.zak_phase(window)
        try:
            tightbinding.flat_band_state(window, 8)
            has_edge = True
        except NoEdgeState:
            has_edge = False
        agree &= (res.winding == 1) == has_edge
        agree &= res.winding in (0, 1)
    checks.append({"name": "bulk-edge correspondence", "ok": bool(agree),
                   "detail": "winding == edge-state existence on 41-point grid"})
    return checks


def _verify_atomic() -> List[Dict]:
    checks = []
    well = atomic.AtomicWell()
    gs = atomic.ground_state(well, 10.0)
    oracle = atomic.bessel_matching_energy(well, 10.0)
    rel = abs(gs.E0 - oracle) / abs(oracle)
    checks.append({"name": "radial solver vs Bessel matching (lambda=10)",
                   "ok": rel < 1e-6, "detail": f"relative difference {rel:.3e}"})
    gap = atomic.spectral_gap(well, 10.0)
    checks.append({"name": "positive spectral gap", "ok": gap > 0,
                   "detail": f"gap {gap:.4f}"})
    hc = atomic.hopping_rho(gs, well)
    exc = atomic.overlap_integral(gs, well, 1, (-1, 0), 0, (0, 0))
    dev = abs(exc - hc.rho) / hc.rho
    checks.append({"name": "exceptional overlap equals rho", "ok": dev < 1e-6,
                   "detail": f"relative deviation {dev:.3e}"})
    return checks


def _verify_continuum() -> List[Dict]:
    checks = []
    well = atomic.AtomicWell()
    lam, kp = 8.0, 5 * math.pi / 6
    gs = atomic.ground_state(well, lam)
    grid = continuum.build_grid(6, (18, 18), 2)
    prob = continuum.assemble_fiber(grid, well, gs, lam, kp)
    H = prob.operator
    herm = abs(H - H.getH()).max()
    checks.append({"name": "cylinder operator Hermitian", "ok": herm < 1e-12,
                   "detail": f"max asymmetry {herm:.3e}"})
    basis = continuum.orbital_basis(prob)
    sol = continuum.edge_eigensolve(prob, gs, basis.rho_grid, 12,
                                    e0_offset=basis.e0_grid)
    nedge = sum(1 for _, _, fl in sol if fl)
    checks.append({"name": "single edge-flagged continuum state", "ok": nedge == 1,
                   "detail": f"count {nedge}"})
    prob2 = continuum.assemble_fiber(grid, well, gs, lam, kp + 2 * math.pi)
    d = abs(prob.operator - prob2.operator).max()
    checks.append({"name": "kpar + 2pi gauge equivalence", "ok": d < 1e-9,
                   "detail": f"operator difference {d:.3e}"})
    return checks


_SUITES = {
    "tb": _verify_tb,
    "zak": _verify_zak,
    "atomic": _verify_atomic,
    "continuum": _verify_continuum,
}


def cmd_verify(args) -> int:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    all_ok = True
    results = []
    for name in names:
        for check in _SUITES[name]():
            results.append({"suite": name, **check})
            all_ok &= check["ok"]
            print(f"[{'PASS' if check['ok'] else 'FAIL'}] {name}: "
                  f"{check['name']} ({check['detail']})")
    if args.out:
        _write_json(args.out, {"results": results, "ok": all_ok})
    print(f"verify: {'all passed' if all_ok else 'FAILURES present'}")
    return 0 if all_ok else 2


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 on validation errors
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zzedge",
                description="Zigzag-edge honeycomb spectra: tight-binding, "
                            "Zak phase, and strong-binding verification.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bands", parents=[], help="tight-binding band sweep to CSV")
    b.add_argument("--kpar-min", type=float, default=0.0)
    b.add_argument("--kpar-max", type=float, default=2 * math.pi)
    b.add_argument("--kpar-steps", type=int, default=241)
    b.add_argument("--ncells", type=int, default=200)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bands)

    e = sub.add_parser("edge-state", help="closed-form flat-band state to CSV")
    e.add_argument("--kpar", type=float, required=True)
    e.add_argument("--ncells", type=int, default=200)
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_edge_state)

    z = sub.add_parser("zak", help="Zak phase sweep to CSV")
    z.add_argument("--kpar-steps", type=int, default=241)
    z.add_argument("--npoints", type=int, default=zak.DEFAULT_NPOINTS)
    z.add_argument("--out", default="-")
    z.set_defaults(func=cmd_zak)

    a = sub.add_parser("atomic", help="atomic ground states and hopping table")
    a.add_argument("--lambdas", default="10,15,20,25",
                   help="comma-separated coupling strengths")
    a.add_argument("--shape", choices=["disc", "bump"], default="disc")
    a.add_argument("--r0", type=float, default=atomic.DEFAULT_R0)
    a.add_argument("--profile-out", default=None,
                   help="optional CSV path for p0 profiles; may contain %%g for lambda")
    a.add_argument("--out", default="-")
    a.set_defaults(func=cmd_atomic)

    c = sub.add_parser("continuum", help="one cylinder fiber solve to JSON")
    c.add_argument("--lambda", dest="lam", type=float, required=True)
    c.add_argument("--kpar", type=float, required=True)
    c.add_argument("--ncells", type=int, default=8)
    c.add_argument("--points", type=int, default=24)
    c.add_argument("--pad-left", type=int, default=2)
    c.add_argument("--nev", type=int, default=None)
    c.add_argument("--shape", choices=["disc", "bump"], default="disc")
    c.add_argument("--r0", type=float, default=atomic.DEFAULT_R0)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_continuum)

    v = sub.add_parser("converge", help="lambda-sweep convergence report (manifest driven)")
    v.add_argument("--manifest", required=True)
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_converge)

    f = sub.add_parser("verify", help="run a module verification suite")
    f.add_argument("--suite", choices=["tb", "zak", "atomic", "continuum", "all"],
                   default="all")
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "continuum" and args.nev is None:
            args.nev = 2 * args.ncells
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"zzedge: invalid parameter: {exc}", file=sys.stderr)
        return 1
    except ZZEdgeError as exc:
        print(f"zzedge: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except _IOFailure as exc:
        print(f"zzedge: I/O failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"zzedge: I/O failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
