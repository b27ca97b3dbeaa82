"""Command-line interface: rem, ising, spherical, duality, oracle, phase.

Every emitted table starts with a "# config: {...}" comment holding the
fully resolved run configuration; rebuilding a RunConfig from that line
and rerunning regenerates the table bit-identically (all seeds and knobs
are in the header, and mixture files are inlined at resolve time).  CSV
floats use repr (shortest binary64 round-trip); the JSON format mirrors
the CSV content.  Exit codes: 0 success, 1 domain/usage error, 2 numerics
error, 3 resource error.  Worker parallelism is capped by the
GLASSDUAL_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .core import MixtureSpec, StepDistribution, TemperatureVector
from .errors import DomainError, NumericsError, ResourceError, UsageError

__all__ = ["RunConfig", "Table", "run", "main", "emit_phase_table"]

HEADER_PREFIX = "# config: "


@dataclass(frozen=True)
class RunConfig:
    """A subcommand plus its fully resolved parameters.

    params holds every knob after applying precedence
    flags > config file > defaults, with mixture files already inlined,
    so a RunConfig parsed back from an emitted header is self-contained.
    """

    subcommand: str
    params: dict

    def header_line(self) -> str:
        return HEADER_PREFIX + json.dumps(
            {"subcommand": self.subcommand, "params": self.params}, sort_keys=True
        )

    @classmethod
    def from_header(cls, line: str) -> "RunConfig":
        line = line.strip()
        if not line.startswith(HEADER_PREFIX):
            raise UsageError("not a config header line")
        data = json.loads(line[len(HEADER_PREFIX):])
        return cls(subcommand=data["subcommand"], params=data["params"])


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); 2 means numerics here
        raise UsageError(message)


def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def _json_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _emit(table: Table, config: RunConfig) -> str:
    if config.params.get("emit") == "json":
        doc = {
            "config": {"subcommand": config.subcommand, "params": config.params},
            "columns": list(table.columns),
            "rows": [[_json_cell(v) for v in row] for row in table.rows],
        }
        return json.dumps(doc, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(config.header_line() + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt_cell(v) for v in row])
    return buf.getvalue()


def _parse_grid(text: str) -> list[float]:
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise UsageError(f"grid step must be > 0 in {text!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            if n < 1:
                raise UsageError(f"grid {text!r} is empty")
            return [start + i * step for i in range(n)]
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from exc
    if not vals:
        raise UsageError(f"grid {text!r} is empty")
    return vals


def _resolve_xi(xi) -> tuple[MixtureSpec, str]:
    """Accept inline JSON or a file path; return (spec, inline json)."""
    if xi is None:
        raise UsageError("missing --xi (mixture JSON or path)")
    text = str(xi).strip()
    if not text.startswith("{"):
        try:
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read mixture file {xi!r}: {exc}") from exc
    spec = MixtureSpec.from_json(text)
    return spec, spec.to_json()


def _numerics_from(params: dict):
    from .ising import ParisiNumerics

    return ParisiNumerics(
        quad_nodes=int(params["quad_nodes"]),
        x_points=int(params["x_points"]),
        multistart=int(params["multistart"]),
        seed=int(params["seed"]),
        tol=float(params["tol"]),
    )


def _betas_from(params: dict) -> list[float]:
    if params.get("beta_grid") is not None:
        return _parse_grid(params["beta_grid"])
    if params.get("beta") is not None:
        return [float(params["beta"])]
    raise UsageError("missing --beta or --beta-grid")


# ---------------------------------------------------------------------------
# subcommand dispatchers


def _run_rem(params: dict) -> Table:
    from .rem import rem_duality_roundtrip, rem_free_energy

    betas = _betas_from(params)
    report = rem_duality_roundtrip(betas)
    rows = []
    for b in betas:
        key = f"beta={b!r}"
        rows.append((b, rem_free_energy(b), report.optimizers[key], report.gaps[key]))
    return Table(columns=("beta", "F", "m_star", "roundtrip_gap"), rows=tuple(rows))


def _run_ising(params: dict) -> Table:
    from .ising import parisi_family

    spec, _ = _resolve_xi(params["xi"])
    betas = _betas_from(params)
    num = _numerics_from(params)
    family = parisi_family(spec, betas, int(params["k"]), num)
    rows = []
    for b in betas:
        sol = family[float(b)]
        rows.append(
            (
                b,
                sol.value,
                sol.phi00,
                sol.correction,
                sol.derivative,
                sol.alpha_star.to_json(),
            )
        )
    return Table(
        columns=("beta", "value", "phi00", "correction", "derivative", "alpha"),
        rows=tuple(rows),
    )


def _beta_vector(params: dict) -> TemperatureVector:
    raw = params.get("beta")
    if raw is None:
        raise UsageError("missing --beta (JSON array of per-degree temperatures)")
    try:
        entries = json.loads(str(raw))
    except json.JSONDecodeError as exc:
        raise UsageError(f"--beta must be a JSON array: {exc}") from exc
    if not isinstance(entries, list):
        raise UsageError("--beta must be a JSON array")
    return TemperatureVector(tuple(float(x) for x in entries))


def _run_spherical(params: dict) -> Table:
    from .spherical import cs_minimize

    beta = _beta_vector(params)
    num = _numerics_from(params)
    sol = cs_minimize(beta, int(params["k"]), num)
    cols = ["beta", "value", "qhat"]
    row = [json.dumps(list(beta.entries)), sol.value, sol.alpha_star.qhat]
    for p, part in enumerate(sol.partials, start=1):
        cols.append(f"partial_{p}")
        row.append(part)
    cols.append("alpha")
    row.append(sol.alpha_star.to_json())
    return Table(columns=tuple(cols), rows=(tuple(row),))


def _duality_handle(params: dict):
    from .duality import ising_handle, oracle_handle, rem_handle, spherical_handle
    from .oracle import sample_disorder

    model = params["model"]
    if model == "rem":
        return rem_handle()
    if model == "ising":
        spec, _ = _resolve_xi(params["xi"])
        return ising_handle(
            spec,
            k=int(params["k"]),
            num=_numerics_from(params),
            beta_max=float(params["box_hi"]),
            grid_points=int(params["handle_grid"]),
        )
    if model == "spherical":
        beta = _beta_vector(params)
        return spherical_handle(len(beta), k=int(params["k"]), num=_numerics_from(params))
    if model == "oracle":
        if params.get("xi") is not None:
            spec, _ = _resolve_xi(params["xi"])
            sample = sample_disorder("ising_mixed", spec, int(params["N"]), int(params["seed"]))
        else:
            sample = sample_disorder("rem", None, int(params["N"]), int(params["seed"]))
        return oracle_handle(sample)
    raise UsageError(f"unknown duality model {model!r}")


def _run_duality(params: dict) -> Table:
    from .duality import SearchBox, legendre_sup_V, roundtrip_gap

    handle = _duality_handle(params)
    box = SearchBox(0.0, float(params["box_hi"]))
    rows = []
    columns = None
    if params.get("beta") is not None or params.get("beta_grid") is not None:
        if params["model"] == "spherical":
            betas = [_beta_vector(params)]
        else:
            betas = _betas_from(params)
        columns = (
            "beta",
            "free_energy",
            "recovered",
            "gap",
            "beta_star",
            "m_star",
            "sup_boundary",
            "inf_boundary",
        )
        for b in betas:
            rep = roundtrip_gap(handle, b, box)
            label = json.dumps(list(b.entries)) if isinstance(b, TemperatureVector) else b
            rows.append(
                (
                    label,
                    rep.optimizers["free_energy"],
                    rep.optimizers["recovered"],
                    rep.gaps["roundtrip"],
                    json.dumps(rep.optimizers["beta_star"]),
                    json.dumps(rep.optimizers["m_star"]),
                    rep.flags["sup_boundary"],
                    rep.flags["inf_boundary"],
                )
            )
    elif params.get("m") is not None or params.get("m_grid") is not None:
        ms = (
            _parse_grid(params["m_grid"])
            if params.get("m_grid") is not None
            else [float(params["m"])]
        )
        columns = ("m", "V", "beta_star", "boundary")
        for m in ms:
            res = legendre_sup_V(handle, m, box)
            rows.append((m, res.value, json.dumps(res.arg.tolist()), res.boundary))
    else:
        raise UsageError("duality needs --beta/--beta-grid or --m/--m-grid")
    return Table(columns=columns, rows=tuple(rows))


def _run_oracle(params: dict) -> Table:
    from numpy.random import SeedSequence

    from .oracle import (
        exact_free_energy,
        exact_squared_free_energy,
        finite_n_inequality_check,
        sample_disorder,
        sup_norm_stats,
    )

    model = params["model"]
    spec = None
    if model in ("ising", "ising_mixed"):
        spec, _ = _resolve_xi(params["xi"])
    check = params["check"]
    n = int(params["N"])
    replicas = int(params["replicas"])
    if replicas < 1:
        raise UsageError(f"--replicas must be >= 1, got {replicas}")
    seeds = [int(s) for s in SeedSequence(int(params["seed"])).generate_state(replicas, np.uint64)]

    def one(seed: int):
        sample = sample_disorder(model, spec, n, seed)
        if check == "F":
            return {"value": exact_free_energy(sample, float(params["beta"]))}
        if check == "V":
            return {"value": exact_squared_free_energy(sample, float(params["m"]))}
        if check == "inequality":
            return {
                "value": finite_n_inequality_check(
                    sample, float(params["beta"]), float(params["m"])
                )
            }
        if check == "supnorm":
            stats = sup_norm_stats(sample)
            out = {f"sup_p{p}": v for p, v in sorted(stats.per_degree.items())}
            out["sup_h"] = stats.sup_h
            out["inf_h"] = stats.inf_h
            return out
        raise UsageError(f"unknown --check {check!r}")

    results = [one(s) for s in seeds]
    value_cols = list(results[0])
    columns = tuple(["replica"] + value_cols)
    rows = [tuple([i] + [r[c] for c in value_cols]) for i, r in enumerate(results)]
    data = np.array([[r[c] for c in value_cols] for r in results], dtype=float)
    rows.append(tuple(["mean"] + [float(x) for x in data.mean(axis=0)]))
    if replicas > 1:
        se = data.std(axis=0, ddof=1) / math.sqrt(replicas)
    else:
        se = np.zeros(len(value_cols))
    rows.append(tuple(["stderr"] + [float(x) for x in se]))
    return Table(columns=columns, rows=tuple(rows))


def emit_phase_table(model: str, beta_grid, config: RunConfig) -> Table:
    """Per-beta phase diagnostics: F, F', m* = F'/beta, roundtrip gap, and a
    local concavity statistic (raw second difference of t -> F(sqrt(t)) at
    t = beta^2 with a relative step).

    rem rows come from closed forms; ising rows solve the variational
    problem at each grid point and use a spline handle (built over
    handle_grid warm-started points) for the roundtrip and concavity
    columns.
    """
    from .duality import SearchBox, ising_handle, rem_handle, roundtrip_gap

    params = config.params
    betas = [float(b) for b in beta_grid]
    if not betas:
        raise UsageError("phase grid is empty")
    if model == "rem":
        from .rem import rem_critical_beta, rem_free_energy

        handle = rem_handle()
        bc = rem_critical_beta()
        values = {b: rem_free_energy(b) for b in betas}
        derivs = {b: min(b, bc) for b in betas}
        box_hi = max(4.0, 1.5 * max(betas))
    elif model == "ising":
        from .ising import parisi_family

        spec, _ = _resolve_xi(params["xi"])
        num = _numerics_from(params)
        k = int(params["k"])
        family = parisi_family(spec, betas, k, num)
        box_hi = max(4.0, 1.5 * max(betas))
        handle = ising_handle(
            spec,
            k=k,
            num=num,
            beta_max=box_hi,
            grid_points=int(params["handle_grid"]),
            family=family,
        )
        values = {b: family[b].value for b in betas}
        derivs = {b: family[b].derivative for b in betas}
    else:
        raise UsageError(f"phase supports rem and ising, got {model!r}")

    box = SearchBox(0.0, box_hi)
    rows = []
    for b in betas:
        rep = roundtrip_gap(handle, b, box)
        t = b * b
        h = 1e-3 * (1.0 + t)
        f = lambda tv: handle.evaluate(np.array([math.sqrt(tv)]))
        second = f(t - h) - 2.0 * f(t) + f(t + h) if t - h > 0 else 0.0
        rows.append(
            (b, values[b], derivs[b], derivs[b] / b, rep.gaps["roundtrip"], second)
        )
    return Table(
        columns=(
            "beta",
            "free_energy",
            "derivative",
            "stationary_m",
            "roundtrip_gap",
            "concavity_stat",
        ),
        rows=tuple(rows),
    )


def _run_phase(params: dict, config: RunConfig) -> Table:
    betas = _betas_from(params)
    return emit_phase_table(params["model"], betas, config)


# ---------------------------------------------------------------------------
# argument parsing and config resolution

_COMMON_DEFAULTS = {
    "emit": "csv",
    "output": None,
    "seed": 1234,
    "k": 2,
    "quad_nodes": 40,
    "x_points": 2048,
    "multistart": 8,
    "tol": 1e-9,
}

_SUB_DEFAULTS = {
    "rem": {"beta": None, "beta_grid": None},
    "ising": {"xi": None, "beta": None, "beta_grid": None},
    "spherical": {"beta": None},
    "duality": {
        "model": "rem",
        "xi": None,
        "beta": None,
        "beta_grid": None,
        "m": None,
        "m_grid": None,
        "N": 10,
        "box_hi": 4.0,
        "handle_grid": 16,
    },
    "oracle": {
        "model": "rem",
        "xi": None,
        "N": 10,
        "replicas": 8,
        "beta": 1.0,
        "m": 1.0,
        "check": "F",
    },
    "phase": {"model": "rem", "xi": None, "beta": None, "beta_grid": None, "handle_grid": 16},
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="glassdual", description=__doc__)
    subs = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    def add_common(sp):
        sp.add_argument("--emit", choices=("csv", "json"))
        sp.add_argument("--output")
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--quad-nodes", dest="quad_nodes", type=int)
        sp.add_argument("--x-points", dest="x_points", type=int)
        sp.add_argument("--multistart", type=int)
        sp.add_argument("--tol", type=float)

    sp = subs.add_parser("rem")
    add_common(sp)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--beta-grid", dest="beta_grid")

    sp = subs.add_parser("ising")
    add_common(sp)
    sp.add_argument("--xi")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--beta-grid", dest="beta_grid")

    sp = subs.add_parser("spherical")
    add_common(sp)
    sp.add_argument("--beta")

    sp = subs.add_parser("duality")
    add_common(sp)
    sp.add_argument("--model", choices=("rem", "ising", "spherical", "oracle"))
    sp.add_argument("--xi")
    sp.add_argument("--beta")
    sp.add_argument("--beta-grid", dest="beta_grid")
    sp.add_argument("--m", type=float)
    sp.add_argument("--m-grid", dest="m_grid")
    sp.add_argument("--N", type=int)
    sp.add_argument("--box-hi", dest="box_hi", type=float)
    sp.add_argument("--handle-grid", dest="handle_grid", type=int)

    sp = subs.add_parser("oracle")
    add_common(sp)
    sp.add_argument("--model", choices=("rem", "ising", "ising_mixed"))
    sp.add_argument("--xi")
    sp.add_argument("--N", type=int)
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--m", type=float)
    sp.add_argument("--check", choices=("F", "V", "inequality", "supnorm"))

    sp = subs.add_parser("phase")
    add_common(sp)
    sp.add_argument("--model", choices=("rem", "ising"))
    sp.add_argument("--xi")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--beta-grid", dest="beta_grid")
    sp.add_argument("--handle-grid", dest="handle_grid", type=int)

    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    sub = args.subcommand
    if sub is None:
        raise UsageError("missing subcommand (rem|ising|spherical|duality|oracle|phase)")
    params = dict(_COMMON_DEFAULTS)
    params.update(_SUB_DEFAULTS[sub])
    known = set(params)

    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_params = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {config_path!r}: {exc}") from exc
        if not isinstance(file_params, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in file_params.items():
            if key not in known:
                raise UsageError(f"config file sets unknown parameter {key!r}")
            params[key] = val

    for key in known:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val

    if params.get("tol") is not None and not float(params["tol"]) > 0:
        raise UsageError(f"tolerance must be positive, got {params['tol']}")

    if params.get("xi") is not None:
        _, inline = _resolve_xi(params["xi"])
        params["xi"] = inline  # header must regenerate without the file

    return RunConfig(subcommand=sub, params=params)


def run(config: RunConfig, stream=None) -> int:
    """Dispatch a resolved configuration; returns the process exit code."""
    sub = config.subcommand
    try:
        if sub == "rem":
            table = _run_rem(config.params)
        elif sub == "ising":
            table = _run_ising(config.params)
        elif sub == "spherical":
            table = _run_spherical(config.params)
        elif sub == "duality":
            table = _run_duality(config.params)
        elif sub == "oracle":
            table = _run_oracle(config.params)
        elif sub == "phase":
            table = _run_phase(config.params, config)
        else:
            raise UsageError(f"unknown subcommand {sub!r}")
    except (DomainError, UsageError) as exc:
        print(f"error[{sub}]: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"error[{sub}]: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"error[{sub}]: {exc}", file=sys.stderr)
        return 3

    text = _emit(table, config)
    out_path = config.params.get("output")
    if stream is not None:
        stream.write(text)
    elif out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = _resolve(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
