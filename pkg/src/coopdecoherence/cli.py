"""Command-line front end: ``coopdeco <command> ...``.

Exit status 0 on success, 1 on domain / input errors (one JSON line on
stderr), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bath_sim
from .coherence_codec import decode, efficiency_max, encode, encoding_circuit
from .collective_operator import CouplingSpec, eigenspace_dims, variance_A
from .decoherence_rate import (
    BathSpec,
    PerModeCouplings,
    omega_squared,
    rate_collective,
    rate_general,
    rate_independent,
)
from .errors import CoopDecoherenceError

SCHEMA = 1


class _ParseError(Exception):
    pass


def _dumps(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise _ParseError(f"{path}: top-level JSON value must be an object")
    return doc


def _coupling(raw, num_qubits: int) -> CouplingSpec:
    arr = np.asarray(raw, dtype=float)
    if arr.shape == (3,):
        return CouplingSpec.uniform_coupling(arr, num_qubits)
    return CouplingSpec(tuple(map(tuple, arr)))


def _bath(raw: dict) -> BathSpec:
    continuum = bool(raw.get("continuum", False))
    modes = [tuple(m) if not isinstance(m, dict) else (m["omega"], m.get("kappa", 0.0)) for m in raw["modes"]]
    return BathSpec(tuple(modes), float(raw.get("temperature", 0.0)), continuum)


def cmd_rate(args) -> dict:
    doc = _load(args.config)
    state = bath_sim.state_from_interleaved(doc["state"])
    bath = _bath(doc["bath"])
    out = {"schema": SCHEMA, "kind": args.kind}
    if args.kind == "general":
        pm = PerModeCouplings(doc["per_mode"])
        out["rate"] = rate_general(pm, state, bath)
        return out
    c = _coupling(doc["coupling"], state.num_sites)
    if args.kind == "collective":
        out["rate"] = rate_collective(c, state, bath)
        out["variance"] = variance_A(c, state)
    else:
        out["rate"] = rate_independent(c, state, bath)
    out["omega_squared"] = omega_squared(bath)
    return out


def cmd_spectrum(args) -> dict:
    table = eigenspace_dims(args.L)
    out = {"schema": SCHEMA, "0": table.entries[0]}
    for k in range(1, args.L + 1):
        out[str(2 * k)] = table.entries[2 * k]
        out[str(-2 * k)] = table.entries[-2 * k]
    out["total"] = table.total
    return out


def _codec_inputs(args):
    doc = _load(args.config)
    state = bath_sim.state_from_interleaved(doc["state"])
    triple = np.asarray(doc["coupling"], dtype=float)
    if triple.shape != (3,):
        c = CouplingSpec(tuple(map(tuple, triple)))
        if not c.uniform:
            raise CoopDecoherenceError("encoding needs a uniform coupling")
        triple = np.asarray(c.per_qubit[0])
    return state, tuple(triple)


def cmd_encode(args) -> dict:
    state, triple = _codec_inputs(args)
    encoded = encode(state, triple)
    if args.circuit:
        Path(args.circuit).write_text(encoding_circuit(state.num_sites, triple).to_text())
    return {"schema": SCHEMA, "num_qubits": encoded.num_sites, "state": bath_sim.state_to_interleaved(encoded)}


def cmd_decode(args) -> dict:
    state, triple = _codec_inputs(args)
    decoded = decode(state, triple)
    return {"schema": SCHEMA, "num_qubits": decoded.num_sites, "state": bath_sim.state_to_interleaved(decoded)}


def cmd_efficiency(args) -> dict:
    b = efficiency_max(args.L)
    return {
        "schema": SCHEMA,
        "L": b.L,
        "eta": b.eta,
        "asymptote": b.asymptote,
        "cost_pi_L_over_2": b.cost_pi_L_over_2,
        "cost_pi_over_2L": b.cost_pi_over_2L,
    }


def cmd_simulate(args) -> dict:
    cfg = bath_sim.config_from_dict(_load(args.config))
    trace = bath_sim.evolve_delta(cfg)
    if args.output:
        Path(args.output).write_text(trace.to_csv())
    else:
        sys.stdout.write(trace.to_csv())
    summary = trace.summary()
    _emit(_dumps(summary), args.summary)
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopdeco", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="closed-form short-time decoherence rate")
    p.add_argument("kind", choices=["collective", "independent", "general"])
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("spectrum", help="sector dimensions of A on 2L qubits")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_spectrum)

    for name, func in (("encode", cmd_encode), ("decode", cmd_decode)):
        p = sub.add_parser(name, help=f"{name} a state with the CNOT codec")
        p.add_argument("--config", required=True)
        p.add_argument("--output")
        if name == "encode":
            p.add_argument("--circuit", help="also write the encoding circuit as text")
        p.set_defaults(func=func)

    p = sub.add_parser("efficiency", help="maximum encoding efficiency for 2L qubits")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("simulate", help="exact qubit + bath evolution")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="CSV trace (t, delta, purity); stdout if omitted")
    p.add_argument("--summary", help="JSON summary; stdout if omitted")
    p.set_defaults(func=cmd_simulate)
    return parser


def _fail(kind: str, message: str) -> int:
    sys.stderr.write(_dumps({"error": kind, "message": message}))
    return 1


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except _ParseError as exc:
        return _fail("parse", str(exc))
    except (CoopDecoherenceError, ArithmeticError) as exc:
        return _fail("domain", str(exc))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        # missing keys or wrongly typed JSON values
        return _fail("domain", f"{type(exc).__name__}: {exc}")
    if result is not None:
        _emit(_dumps(result), args.output)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
