"""Command-line front-end.

Usage::

    parallelity validate STATE.json
    parallelity bures RHO.json SIGMA.json [--overlap]
    parallelity spectral-distance RHO.json SIGMA.json
    parallelity uhlmann SEQ.json [--route w_product|operator_form|both]
    parallelity spectral-holonomy SEQ.json
    parallelity minimize RHO.json SIGMA.json [--samples N] [--seed S]
    parallelity figure1 --p-steps N --eta-steps M --out grid.csv

Results go to stdout as a JSON record. Errors go to stderr as a JSON record
with a machine-readable ``code``; the exit status identifies the error class.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import bures, matops, qubit, spectral
from .ensemble import RANK_TOL, DensityOperator
from .errors import GeometryError, IoError
from .fileio import dumps_record, encode_complex, encode_matrix, read_matrix_file, read_sequence_file


def _state(path, tol_herm: float) -> DensityOperator:
    return DensityOperator.from_matrix(read_matrix_file(path), tol=tol_herm)


def _sequence(path, tol_herm: float) -> list[DensityOperator]:
    return [DensityOperator.from_matrix(m, tol=tol_herm) for m in read_sequence_file(path)]


def _phase_field(h: bures.HolonomyResult) -> dict[str, Any]:
    if h.phase is None:
        return {"phase": None, "phase_reason": f"|trace| <= phase_tol ({h.phase_tol!r}); phase undefined"}
    return {"phase": h.phase}


def _record(command: str, inputs: dict, outputs: dict, diagnostics: dict) -> dict[str, Any]:
    return {"command": command, "inputs": inputs, "outputs": outputs, "diagnostics": diagnostics}


def cmd_validate(path, tol_herm: float = RANK_TOL) -> dict[str, Any]:
    m = read_matrix_file(path)
    eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[::-1]
    residuals = {
        "hermiticity": matops.hermiticity_residual(m),
        "trace": float(np.trace(m).real) - 1.0,
        "min_eigenvalue": float(eig[-1]),
    }
    try:
        rank = matops.validate_density(m, tol=tol_herm)
    except GeometryError as exc:
        exc.details.setdefault("residuals", residuals)
        raise
    return _record(
        "validate",
        {"path": str(path)},
        {"rank": rank, "eigenvalues": [float(x) for x in eig], "residuals": residuals},
        {"dim": int(m.shape[0]), "tol_herm": tol_herm},
    )


def cmd_bures(
    path_rho,
    path_sigma,
    overlap: bool = False,
    tol_herm: float = RANK_TOL,
    tol_singular: float = matops.SINGULAR_TOL,
) -> dict[str, Any]:
    rho, sigma = _state(path_rho, tol_herm), _state(path_sigma, tol_herm)
    f = bures.fidelity(rho, sigma)
    outputs: dict[str, Any] = {"fidelity": f, "bures_distance": bures.bures_distance(rho, sigma)}
    if overlap:
        ov = bures.overlap_matrix(rho, sigma, tol_singular)
        outputs["fidelity_overlap_route"] = ov.fidelity
        outputs["route_residual"] = abs(ov.fidelity - f)
    return _record(
        "bures",
        {"rho": str(path_rho), "sigma": str(path_sigma), "overlap": overlap},
        outputs,
        {"dim": rho.dim, "rank_rho": rho.rank, "rank_sigma": sigma.rank, "tol_herm": tol_herm, "tol_singular": tol_singular},
    )


def cmd_spectral_distance(
    path_rho,
    path_sigma,
    tol_herm: float = RANK_TOL,
    tol_degeneracy: float = spectral.DEGENERACY_TOL,
) -> dict[str, Any]:
    rho, sigma = _state(path_rho, tol_herm), _state(path_sigma, tol_herm)
    perm, weight = spectral.optimal_permutation(rho, sigma, tol_degeneracy)
    d = spectral.spectral_distance(rho, sigma, tol_degeneracy)
    db = bures.bures_distance(rho, sigma)
    return _record(
        "spectral-distance",
        {"rho": str(path_rho), "sigma": str(path_sigma)},
        {
            "spectral_distance": d,
            "permutation": list(perm.map),
            "weight": weight,
            "bures_distance": db,
            "gap": d - db,
        },
        {"dim": rho.dim, "K": rho.rank, "tol_herm": tol_herm, "tol_degeneracy": tol_degeneracy},
    )


def cmd_uhlmann(
    path_sequence,
    route: str = "w_product",
    tol_herm: float = RANK_TOL,
    tol_singular: float = matops.SINGULAR_TOL,
) -> dict[str, Any]:
    seq = _sequence(path_sequence, tol_herm)
    if route not in ("w_product", "operator_form", "both"):
        raise ValueError(f"unknown route {route!r}")
    if route == "operator_form":
        h = bures.uhlmann_holonomy_operator_form(seq, tol_singular)
    else:
        h = bures.uhlmann_holonomy(seq, tol_singular)
    outputs: dict[str, Any] = {"holonomy": encode_matrix(h.u), "trace": encode_complex(h.trace), **_phase_field(h)}
    if route == "both":
        alt = bures.uhlmann_holonomy_operator_form(seq, tol_singular)
        outputs["operator_form_trace"] = encode_complex(alt.trace)
        outputs["route_residual"] = float(np.max(np.abs(h.u - alt.u)))
    return _record(
        "uhlmann",
        {"sequence": str(path_sequence), "route": route},
        outputs,
        {"n": len(seq), "dim": seq[0].dim, "K": seq[0].rank, "tol_herm": tol_herm, "tol_singular": tol_singular, "phase_tol": h.phase_tol},
    )


def cmd_spectral_holonomy(
    path_sequence,
    tol_herm: float = RANK_TOL,
    tol_degeneracy: float = spectral.DEGENERACY_TOL,
) -> dict[str, Any]:
    seq = _sequence(path_sequence, tol_herm)
    h = spectral.spectral_holonomy(seq, tol_degeneracy)
    steps = [
        {
            "step": s.index,
            "permutation": list(s.permutation.map),
            "weight": s.weight,
            "matched_phases": [float(x) for x in s.matched_phases],
        }
        for s in h.steps
    ]
    return _record(
        "spectral-holonomy",
        {"sequence": str(path_sequence)},
        {
            "holonomy": encode_matrix(h.u),
            "total_permutation": list(h.total_permutation.map),
            "trace": encode_complex(h.trace),
            **_phase_field(h),
            "steps": steps,
        },
        {"n": len(seq), "dim": seq[0].dim, "K": seq[0].rank, "tol_herm": tol_herm, "tol_degeneracy": tol_degeneracy, "phase_tol": h.phase_tol},
    )


def cmd_minimize(path_rho, path_sigma, samples: int, seed: int, tol_herm: float = RANK_TOL) -> dict[str, Any]:
    rho, sigma = _state(path_rho, tol_herm), _state(path_sigma, tol_herm)
    best = bures.minimize_distance_bruteforce(rho, sigma, samples, seed)
    db = bures.bures_distance(rho, sigma)
    return _record(
        "minimize",
        {"rho": str(path_rho), "sigma": str(path_sigma), "samples": samples, "seed": seed},
        {"sampled_minimum": best, "bures_distance": db, "excess": best - db},
        {"dim": rho.dim, "K": rho.rank, "tol_herm": tol_herm},
    )


def cmd_figure1(p_steps: int, eta_steps: int, out_path) -> dict[str, Any]:
    rows = list(qubit.figure1_grid(p_steps, eta_steps))
    tol = spectral.DEGENERACY_TOL
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("# spectral distance d_min over weight p and unbiasedness eta\n")
            fh.write(f"# degenerate window |p - 0.5| <= {tol!r} excised; grid points inside it moved to 0.5 -+ {2 * tol!r}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["p", "eta", "d_min", "regime"])
            for r in rows:
                writer.writerow([repr(r.p), repr(r.eta), repr(r.d_min), r.regime.value])
    except OSError as exc:
        raise IoError(f"cannot write {out_path}: {exc.strerror}", path=str(out_path)) from None
    return _record(
        "figure1",
        {"p_steps": p_steps, "eta_steps": eta_steps, "out": str(out_path)},
        {"rows": len(rows), "swap_rows": sum(r.regime is qubit.Regime.SWAP for r in rows)},
        {"tol_degeneracy": tol},
    )


def read_grid(path) -> list[dict[str, Any]]:
    """Parse a grid file written by :func:`cmd_figure1`."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        rows.append({"p": float(rec["p"]), "eta": float(rec["eta"]), "d_min": float(rec["d_min"]), "regime": rec["regime"]})
    return rows


def build_parser() -> argparse.ArgumentParser:
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--tol-herm", type=float, default=RANK_TOL, help="Hermiticity/trace/PSD/rank tolerance (default %(default)s)")
    tol.add_argument("--tol-degeneracy", type=float, default=spectral.DEGENERACY_TOL, help="minimum eigenvalue gap (default %(default)s)")
    tol.add_argument("--tol-singular", type=float, default=matops.SINGULAR_TOL, help="minimum overlap singular value (default %(default)s)")

    parser = argparse.ArgumentParser(prog="parallelity", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[tol], help="check a density matrix file")
    p.add_argument("path")

    p = sub.add_parser("bures", parents=[tol], help="fidelity and Bures distance")
    p.add_argument("rho")
    p.add_argument("sigma")
    p.add_argument("--overlap", action="store_true", help="also report the Tr|M| route and its residual")

    p = sub.add_parser("spectral-distance", parents=[tol], help="spectral distance and optimal permutation")
    p.add_argument("rho")
    p.add_argument("sigma")

    p = sub.add_parser("uhlmann", parents=[tol], help="Uhlmann holonomy of a sequence")
    p.add_argument("sequence")
    p.add_argument("--route", choices=["w_product", "operator_form", "both"], default="w_product")

    p = sub.add_parser("spectral-holonomy", parents=[tol], help="spectral holonomy and geometric phase")
    p.add_argument("sequence")

    p = sub.add_parser("minimize", parents=[tol], help="stochastic minimum of the decomposition distance")
    p.add_argument("rho")
    p.add_argument("sigma")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("figure1", help="grid of the qubit spectral distance over (p, eta)")
    p.add_argument("--p-steps", type=int, default=50)
    p.add_argument("--eta-steps", type=int, default=50)
    p.add_argument("--out", required=True)
    return parser


def run(args: argparse.Namespace) -> dict[str, Any]:
    c = args.command
    if c == "validate":
        return cmd_validate(args.path, args.tol_herm)
    if c == "bures":
        return cmd_bures(args.rho, args.sigma, args.overlap, args.tol_herm, args.tol_singular)
    if c == "spectral-distance":
        return cmd_spectral_distance(args.rho, args.sigma, args.tol_herm, args.tol_degeneracy)
    if c == "uhlmann":
        return cmd_uhlmann(args.sequence, args.route, args.tol_herm, args.tol_singular)
    if c == "spectral-holonomy":
        return cmd_spectral_holonomy(args.sequence, args.tol_herm, args.tol_degeneracy)
    if c == "minimize":
        return cmd_minimize(args.rho, args.sigma, args.samples, args.seed, args.tol_herm)
    if c == "figure1":
        return cmd_figure1(args.p_steps, args.eta_steps, args.out)
    raise AssertionError(c)


# argparse exits with 2 on bad usage, which would collide with NOT_HERMITIAN
USAGE_EXIT = 64


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code == 2 else int(exc.code or 0)
    try:
        record = run(args)
    except GeometryError as exc:
        print(dumps_record({"command": args.command, "error": exc.to_record()}), file=sys.stderr)
        return exc.exit_code
    print(dumps_record(record))
    return 0


if __name__ == "__main__":
    sys.exit(main())
