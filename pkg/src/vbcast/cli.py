"""Command-line interface: verify / diamond / sample / dump.

Reports are single JSON documents with a versioned schema ("schema": 1),
deterministic for a fixed (flags, seed) pair -- the wall-clock timestamp
is the only field that varies between identical runs.  Exit codes:
0 success, 1 verification failure, 2 operational error (bad arguments,
unreadable files, solver non-convergence).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
import jsonschema

from . import __version__
from .densemat import Operator, Rng, eigh, random_density, random_hermitian
from .supermap import SuperMap
from .broadcast import (
    antisym,
    canonical_b,
    canonical_decomposition,
    check_axioms,
    classical_bcl,
    cloner,
    decoherence,
    family_b_lambda,
    verify_uniqueness,
)
from .diamond import DiamondResult, SdpConfig, diamond_lower_search, diamond_sdp, hptp_upper
from .hovm import depolarizing_mp, exact_mp_map, sample_mp_blocks, theorem3_weight, write_sampling_csv
from .qsample import estimate_with_trace, overhead, sampler_from_decomposition, write_trace_csv
from .sot import check_postprocessing_equivalence, check_sot_axioms

DEFAULT_TOLERANCES = {
    "axioms": 1e-10,
    "uniqueness_residual": 1e-8,
    "spectral": 1e-10,
    "eigenvalues": 1e-8,
    "theorem3": 1e-10,
    "sot": 1e-8,
    "sdp": 1e-5,
}

# Uniqueness certificates above this dimension exceed the desk-scale budget.
UNIQUENESS_DIM_LIMIT = 3


class CliError(Exception):
    """Operational error; carries the process exit code."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    """Validated run parameters shared by every command."""

    dim: int = 2
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str | None = None
    fmt: str = "json"
    threads: int = 1

    def __post_init__(self):
        if not 2 <= self.dim <= 6:
            raise CliError(f"--dim must be between 2 and 6, got {self.dim}")
        if self.fmt not in ("json", "csv"):
            raise CliError(f"--format must be json or csv, got {self.fmt}")
        for name in self.tolerances:
            if name not in DEFAULT_TOLERANCES:
                raise CliError(f"unknown tolerance {name!r}; known: {sorted(DEFAULT_TOLERANCES)}")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances)
        self.tolerances = merged


def _read_threads() -> int:
    raw = os.environ.get("VBCAST_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"VBCAST_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise CliError(f"VBCAST_THREADS must be >= 1, got {n}")
    return n


# ---------------------------------------------------------------------------
# report schemas


def _operator_schema():
    return {
        "type": "object",
        "properties": {
            "rows": {"type": "integer"},
            "cols": {"type": "integer"},
            "re": {"type": "array"},
            "im": {"type": "array"},
        },
        "required": ["rows", "cols", "re", "im"],
        "additionalProperties": False,
    }


def _supermap_schema():
    return {
        "type": "object",
        "properties": {
            "d_in": {"type": "integer"},
            "d_out": {"type": "integer"},
            "choi": _operator_schema(),
        },
        "required": ["d_in", "d_out", "choi"],
        "additionalProperties": False,
    }


_META = {
    "schema": {"const": 1},
    "version": {"type": "string"},
    "command": {"type": "string"},
    "dim": {"type": "integer"},
    "seed": {"type": "integer"},
    "threads": {"type": "integer"},
    "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
    "timestamp": {"type": "string"},
}

REPORT_SCHEMAS = {
    "verify": {
        "type": "object",
        "properties": {
            **_META,
            "target": {"type": "string"},
            "pass": {"type": "boolean"},
            "checks": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "name": {"type": "string"},
                        "pass": {"type": "boolean"},
                        "skipped": {"type": ["string", "null"]},
                        "values": {
                            "type": "object",
                            "additionalProperties": {"type": "number"},
                        },
                    },
                    "required": ["name", "pass", "skipped", "values"],
                    "additionalProperties": False,
                },
            },
        },
        "required": list(_META) + ["target", "pass", "checks"],
        "additionalProperties": False,
    },
    "diamond": {
        "type": "object",
        "properties": {
            **_META,
            "target": {"type": "string"},
            "value": {"type": ["number", "null"]},
            "lower_bound": {"type": ["number", "null"]},
            "upper_bound": {"type": ["number", "null"]},
            "iterations": {"type": "integer"},
            "converged": {"type": "boolean"},
            "witness_state": {"anyOf": [_operator_schema(), {"type": "null"}]},
        },
        "required": list(_META)
        + ["target", "value", "lower_bound", "upper_bound", "iterations", "converged", "witness_state"],
        "additionalProperties": False,
    },
    "sample": {
        "type": "object",
        "properties": {
            **_META,
            "object": {"type": "string"},
            "observable": {"type": "string"},
            "n": {"type": "integer"},
            "result": {"type": "object", "additionalProperties": {"type": "number"}},
        },
        "required": list(_META) + ["object", "observable", "n", "result"],
        "additionalProperties": False,
    },
    "dump": {
        "type": "object",
        "properties": {
            **_META,
            "object": {"type": "string"},
            "supermap": _supermap_schema(),
            "jamiolkowski": _operator_schema(),
            "eigenvalues": {"type": "array", "items": {"type": "number"}},
        },
        "required": list(_META) + ["object", "supermap", "jamiolkowski", "eigenvalues"],
        "additionalProperties": False,
    },
}


def _meta(cfg: RunConfig, command: str) -> dict:
    return {
        "schema": 1,
        "version": __version__,
        "command": command,
        "dim": cfg.dim,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "tolerances": cfg.tolerances,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _emit_json(cfg: RunConfig, doc: dict):
    jsonschema.validate(doc, REPORT_SCHEMAS[doc["command"]])
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    _write_text(cfg.out, text)


def _write_text(out: str | None, text: str):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w") as fp:
            fp.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}") from None


def _status(ok: bool, name: str, detail: str = ""):
    mark = " ok " if ok else "FAIL"
    suffix = f"  {detail}" if detail else ""
    print(f"[{mark}] {name}{suffix}", file=sys.stderr)


# ---------------------------------------------------------------------------
# object registry


def _parse_lambda(name: str) -> float:
    try:
        return float(name.split(":", 1)[1])
    except (IndexError, ValueError):
        raise CliError(f"cannot parse lambda from {name!r}; expected B_lambda:<float>") from None


OBJECT_NAMES = ["B", "B+", "B-", "B_cl", "D", "M", "Mprime", "B_lambda:<x>"]


def build_object(name: str, d: int) -> SuperMap:
    """Named constructors exposed by dump/sample/verify."""
    table = {
        "B": canonical_b,
        "B+": cloner,
        "Bplus": cloner,
        "B-": antisym,
        "Bminus": antisym,
        "B_cl": classical_bcl,
        "D": decoherence,
        "M": exact_mp_map,
        "Mprime": depolarizing_mp,
        "M'": depolarizing_mp,
    }
    if name in table:
        return table[name](d)
    if name.startswith("B_lambda:"):
        return family_b_lambda(d, _parse_lambda(name))
    raise CliError(f"unknown object {name!r}; valid names: {', '.join(OBJECT_NAMES)}")


# ---------------------------------------------------------------------------
# verify


def _expected_spectrum(d: int) -> np.ndarray:
    vals = [(d + 1) / 2] * d + [0.0] * (d**3 - 2 * d) + [-(d - 1) / 2] * d
    return np.array(sorted(vals, reverse=True))


def cmd_verify(cfg: RunConfig, target: str = "B") -> int:
    """Run the full verification battery against a broadcaster target."""
    b = build_object(target, cfg.dim)
    if b.d_out != cfg.dim**2:
        raise CliError(f"target {target!r} is not a broadcaster (d -> d^2)")
    tol = cfg.tolerances
    d = cfg.dim
    checks = []

    rep = check_axioms(b, n_states=100, n_unitaries=20, rng=Rng(cfg.seed, 1))
    ok = rep.passes(tol["axioms"])
    worst = max(
        ("broadcasting", rep.broadcasting),
        ("covariance", rep.covariance),
        ("permutation", rep.permutation),
        ("classical", rep.classical),
        key=lambda t: t[1],
    )
    checks.append(
        {
            "name": "broadcast_axioms",
            "pass": bool(ok),
            "skipped": None,
            "values": {
                "broadcasting": rep.broadcasting,
                "covariance": rep.covariance,
                "permutation": rep.permutation,
                "classical": rep.classical,
            },
        }
    )
    _status(ok, "broadcast_axioms", f"worst: {worst[0]} = {worst[1]:.3e}")

    if d <= UNIQUENESS_DIM_LIMIT:
        cert = verify_uniqueness(d, n_unitaries=20, rng=Rng(cfg.seed, 2))
        ok = cert.nullity == 0 and cert.candidate_residual < tol["uniqueness_residual"]
        checks.append(
            {
                "name": "uniqueness",
                "pass": bool(ok),
                "skipped": None,
                "values": {
                    "nullity": float(cert.nullity),
                    "candidate_residual": cert.candidate_residual,
                    "singular_value_gap": cert.singular_value_gap,
                    "constraint_rows": float(cert.constraint_rows),
                },
            }
        )
        _status(ok, "uniqueness", f"nullity={cert.nullity} residual={cert.candidate_residual:.3e}")
    else:
        checks.append(
            {
                "name": "uniqueness",
                "pass": True,
                "skipped": f"dimension {d} exceeds desk-scale limit {UNIQUENESS_DIM_LIMIT}",
                "values": {},
            }
        )
        _status(True, "uniqueness", "skipped (desk-scale limit)")

    dec = canonical_decomposition(d)
    dec_res = (b.choi - dec.combined().choi).absmax()
    eig_res = float("inf")
    if b.is_hp(1e-8):
        vals, _ = eigh(b.choi)
        eig_res = float(np.abs(vals - _expected_spectrum(d)).max())
    ok = dec_res < tol["spectral"] and eig_res < tol["eigenvalues"]
    checks.append(
        {
            "name": "spectral_decomposition",
            "pass": bool(ok),
            "skipped": None,
            "values": {
                "decomposition_residual": dec_res,
                "eigenvalue_residual": eig_res if np.isfinite(eig_res) else 1e300,
            },
        }
    )
    _status(ok, "spectral_decomposition", f"residual={dec_res:.3e}")

    p = theorem3_weight(d)
    mix = p * exact_mp_map(d) + (1.0 - p) * depolarizing_mp(d)
    t3_res = (b.choi - mix.choi).absmax()
    ok = t3_res < tol["theorem3"]
    checks.append(
        {
            "name": "theorem3",
            "pass": bool(ok),
            "skipped": None,
            "values": {"residual": t3_res, "weight": p},
        }
    )
    _status(ok, "theorem3", f"residual={t3_res:.3e}")

    srep = check_sot_axioms(b, n_cases=25, rng=Rng(cfg.seed, 3))
    ok = srep.passes(tol["sot"])
    checks.append(
        {
            "name": "sot_axioms",
            "pass": bool(ok),
            "skipped": None,
            "values": {
                "covariance": srep.covariance,
                "permutation": srep.permutation,
                "classical": srep.classical,
            },
        }
    )
    _status(ok, "sot_axioms", f"max={srep.max_residual():.3e}")

    pp = check_postprocessing_equivalence(b, n_cases=25, rng=Rng(cfg.seed, 4))
    ok = pp.composition < tol["sot"] and pp.heisenberg < tol["sot"]
    checks.append(
        {
            "name": "sot_postprocessing",
            "pass": bool(ok),
            "skipped": None,
            "values": {"composition": pp.composition, "heisenberg": pp.heisenberg},
        }
    )
    _status(ok, "sot_postprocessing", f"comp={pp.composition:.3e} heis={pp.heisenberg:.3e}")

    all_pass = all(c["pass"] for c in checks)
    doc = _meta(cfg, "verify")
    doc.update({"target": target, "pass": bool(all_pass), "checks": checks})
    _emit_json(cfg, doc)

    if not all_pass:
        failing = [c["name"] for c in checks if not c["pass"]]
        print(f"verification failed: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# diamond


def _resolve_diamond_target(cfg: RunConfig, target: str) -> tuple[SuperMap, float | None]:
    d = cfg.dim
    if target == "B":
        return canonical_b(d), hptp_upper(canonical_decomposition(d))
    if target == "B-minus-Bplus":
        m = canonical_b(d) - cloner(d)
        half = (d - 1) / 2
        from .supermap import AffineDecomposition

        return m, hptp_upper(AffineDecomposition(half, half, cloner(d), antisym(d)))
    path = target.removeprefix("file:")
    if not os.path.exists(path):
        raise CliError(
            f"diamond target {target!r} is neither B, B-minus-Bplus, nor a readable file"
        )
    try:
        with open(path) as fp:
            m = SuperMap.from_json(json.load(fp))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot load supermap from {path}: {exc}") from None
    return m, None


def cmd_diamond(cfg: RunConfig, target: str = "B") -> int:
    """Diamond norm of a named map or a Choi JSON file, with bounds."""
    m, upper = _resolve_diamond_target(cfg, target)
    sdp = diamond_sdp(m, SdpConfig(tolerance=cfg.tolerances["sdp"]))
    low = diamond_lower_search(m, restarts=8, rng=Rng(cfg.seed, 5))

    result = DiamondResult(
        value=sdp.value,
        lower_bound=low.lower_bound,
        upper_bound=upper,
        witness_state=low.witness_state,
        iterations=sdp.iterations,
        converged=sdp.converged,
    )
    doc = _meta(cfg, "diamond")
    doc.update({"target": target})
    doc.update({k: v for k, v in result.to_json().items() if k != "version"})
    _emit_json(cfg, doc)

    bounds = f"value={sdp.value:.6f} lower={low.lower_bound:.6f} upper={upper}"
    if not sdp.converged:
        print(
            f"SDP did not converge within {sdp.iterations} iterations ({bounds})",
            file=sys.stderr,
        )
        return 2
    _status(True, "diamond", bounds)
    return 0


# ---------------------------------------------------------------------------
# sample


_PAULI = {
    "i": np.eye(2),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.diag([1.0, -1.0]).astype(complex),
}


def _parse_observables(obs: str, d: int, rng: Rng) -> tuple[Operator, Operator]:
    if obs == "random":
        return random_hermitian(d, rng), random_hermitian(d, rng)
    if len(obs) == 2 and all(c in _PAULI for c in obs):
        if d != 2:
            raise CliError(f"Pauli observable {obs!r} needs --dim 2, got {d}")
        return Operator(_PAULI[obs[0]]), Operator(_PAULI[obs[1]])
    raise CliError(f"--obs must be two of i/x/y/z or 'random', got {obs!r}")


def cmd_sample(cfg: RunConfig, n: int = 10000, observable: str = "zz", object_name: str = "B") -> int:
    """Quasi-probability (object B) or measure-and-prepare (object M) sampling."""
    if n < 2:
        raise CliError(f"--n must be at least 2, got {n}")
    d = cfg.dim
    rho = random_density(d, Rng(cfg.seed, 10))

    if object_name == "B":
        sampler = sampler_from_decomposition(canonical_decomposition(d))
        o1, o2 = _parse_observables(observable, d, Rng(cfg.seed, 11))
        est, rows = estimate_with_trace(sampler, rho, o1, o2, n, Rng(cfg.seed, 12))
        if cfg.fmt == "csv":
            import io

            buf = io.StringIO()
            write_trace_csv(buf, rows)
            _write_text(cfg.out, buf.getvalue())
        else:
            doc = _meta(cfg, "sample")
            doc.update(
                {
                    "object": "B",
                    "observable": observable,
                    "n": n,
                    "result": {
                        "mean": est.mean,
                        "stderr": est.stderr,
                        "exact": est.exact,
                        "l1_overhead": overhead(sampler),
                        "zscore": est.zscore(),
                    },
                }
            )
            _emit_json(cfg, doc)
        _status(True, "sample", f"mean={est.mean:.6f} exact={est.exact:.6f} z={est.zscore():.2f}")
        return 0

    if object_name == "M":
        blocks = sample_mp_blocks(rho, d, n, n_blocks=10, rng=Rng(cfg.seed, 12))
        final = blocks[-1][1]
        if cfg.fmt == "csv":
            import io

            buf = io.StringIO()
            write_sampling_csv(buf, blocks)
            _write_text(cfg.out, buf.getvalue())
        else:
            doc = _meta(cfg, "sample")
            doc.update(
                {
                    "object": "M",
                    "observable": observable,
                    "n": n,
                    "result": {"max_zscore": final.max_zscore(), "n_blocks": 10.0},
                }
            )
            _emit_json(cfg, doc)
        _status(True, "sample", f"max_z={final.max_zscore():.2f} over {final.n} samples")
        return 0

    raise CliError(f"sampling supports --object B or M, got {object_name!r}")


# ---------------------------------------------------------------------------
# dump


def cmd_dump(cfg: RunConfig, object_name: str) -> int:
    """Write Choi/Jamiolkowski JSON of a named constructor."""
    m = build_object(object_name, cfg.dim)
    if m.is_hp(1e-8):
        vals, _ = eigh(m.choi)
        eigenvalues = [float(v) for v in vals]
    else:
        eigenvalues = []
    doc = _meta(cfg, "dump")
    doc.update(
        {
            "object": object_name,
            "supermap": m.to_json(),
            "jamiolkowski": m.jamiolkowski().to_json(),
            "eigenvalues": eigenvalues,
        }
    )
    _emit_json(cfg, doc)
    return 0


# ---------------------------------------------------------------------------
# entry point


def _parse_tol(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise CliError(f"--tol expects name=value, got {pair!r}")
        name, _, raw = pair.partition("=")
        try:
            out[name] = float(raw)
        except ValueError:
            raise CliError(f"--tol {name} needs a numeric value, got {raw!r}") from None
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vbcast", description="Virtual broadcasting maps: verification and sampling."
    )
    parser.add_argument("--version", action="version", version=f"vbcast {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--dim", type=int, default=2, help="system dimension (2-6)")
        p.add_argument("--seed", type=int, default=0, help="master random seed")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VAL")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", default=None, choices=["json", "csv"])

    p = sub.add_parser("verify", help="run the verification battery")
    common(p)
    p.add_argument("--target", default="B", help="broadcaster to verify (default B)")

    p = sub.add_parser("diamond", help="diamond norm with bounds")
    common(p)
    p.add_argument("--target", default="B", help="B, B-minus-Bplus, or a supermap JSON path")

    p = sub.add_parser("sample", help="sampling pipelines")
    common(p)
    p.add_argument("--object", dest="object_name", default="B", help="B (quasi-prob) or M (Haar MC)")
    p.add_argument("--n", type=int, default=10000, help="number of samples")
    p.add_argument("--obs", default="zz", help="two Pauli letters or 'random'")

    p = sub.add_parser("dump", help="write Choi/Jamiolkowski JSON of a named map")
    common(p)
    p.add_argument("--object", dest="object_name", required=True, help="named constructor")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        fmt = args.fmt if args.fmt is not None else ("csv" if args.cmd == "sample" else "json")
        cfg = RunConfig(
            dim=args.dim,
            seed=args.seed,
            tolerances=_parse_tol(args.tol),
            out=args.out,
            fmt=fmt,
            threads=_read_threads(),
        )
        if args.cmd == "verify":
            return cmd_verify(cfg, target=args.target)
        if args.cmd == "diamond":
            return cmd_diamond(cfg, target=args.target)
        if args.cmd == "sample":
            return cmd_sample(cfg, n=args.n, observable=args.obs, object_name=args.object_name)
        if args.cmd == "dump":
            return cmd_dump(cfg, object_name=args.object_name)
        raise CliError(f"unknown command {args.cmd!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
