"""Experiment harness: config parsing, subcommand dispatch, CSV reports.

Subcommands: ``recurrence`` (print per-cell recurrence tables), ``simulate``
(write sampled paths), ``verify {cf,moments,isometry,orthogonality}`` (run
one check) and ``report`` (run the configured check list).  All numeric
output is CSV with full-precision floats, so identical (config, seed) runs
produce byte-identical artifacts.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError, LevyChaosError
from .fock import ModeBasis
from .lattice import Lattice
from .measures import DiscreteMeasure, MeasureField, MomentMeasure, SpectralMeasure
from .sampler import BATCH, sample_batch
from .verify import CHECKS, CheckRow, run_check

KNOWN_CHECKS = tuple(CHECKS)


@dataclass(frozen=True)
class ExperimentConfig:
    field: MeasureField
    degree_cut: int
    particle_cap: int
    samples: int
    seed: int
    threads: int
    checks: tuple[str, ...]
    out_dir: str
    test_function: np.ndarray | None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    return parse_config(data, str(path))


_TOP_KEYS = {
    "lattice",
    "measure",
    "cell_measures",
    "truncation",
    "monte_carlo",
    "checks",
    "output",
    "test_function",
}
_TABLE_KEYS = {
    "lattice": {"dimension", "volumes", "boxes"},
    "truncation": {"degree", "particles"},
    "monte_carlo": {"samples", "seed", "threads"},
    "output": {"dir"},
    "test_function": {"values"},
}


def parse_config(data: dict, where: str = "<config>") -> ExperimentConfig:
    _reject_unknown(data, _TOP_KEYS, where)
    for table, known in _TABLE_KEYS.items():
        if table in data:
            _reject_unknown(data[table], known, f"{where}: [{table}]")
    lattice = _parse_lattice(data.get("lattice"), where)
    field = _parse_field(data, lattice, where)

    trunc = data.get("truncation", {})
    degree_cut = _pos_int(trunc.get("degree", 4), f"{where}: truncation.degree")
    particle_cap = _pos_int(trunc.get("particles", 4), f"{where}: truncation.particles")

    mc = data.get("monte_carlo", {})
    samples = int(mc.get("samples", 100_000))
    if samples < 2:
        raise ConfigError(f"{where}: monte_carlo.samples must be >= 2")
    seed = int(mc.get("seed", 0))
    threads = _pos_int(mc.get("threads", 1), f"{where}: monte_carlo.threads")

    checks = tuple(data.get("checks", []))
    for name in checks:
        if name not in KNOWN_CHECKS:
            raise ConfigError(
                f"{where}: unknown check {name!r} (known: {', '.join(KNOWN_CHECKS)})"
            )

    out_dir = str(data.get("output", {}).get("dir", "."))

    tf = data.get("test_function", {}).get("values")
    test_function = None
    if tf is not None:
        test_function = np.asarray(tf, float)
        if test_function.shape != (lattice.n_cells,):
            raise ConfigError(
                f"{where}: test_function.values needs one entry per cell "
                f"({lattice.n_cells})"
            )

    return ExperimentConfig(
        field=field,
        degree_cut=degree_cut,
        particle_cap=particle_cap,
        samples=samples,
        seed=seed,
        threads=threads,
        checks=checks,
        out_dir=out_dir,
        test_function=test_function,
    )


def _reject_unknown(tbl, known: set, where: str) -> None:
    if not isinstance(tbl, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(tbl) - known
    if unknown:
        raise ConfigError(
            f"{where}: unknown key(s) {sorted(unknown)} (known: {sorted(known)}); "
            f"note that top-level keys like 'checks' must precede any [table]"
        )


def _pos_int(value, label: str) -> int:
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{label} must be an integer")
    if value < 1:
        raise ConfigError(f"{label} must be >= 1")
    return value


def _parse_lattice(tbl, where: str) -> Lattice:
    if tbl is None:
        raise ConfigError(f"{where}: missing [lattice] table")
    try:
        if "boxes" in tbl:
            boxes = [(lo, hi) for lo, hi in tbl["boxes"]]
            return Lattice.from_boxes(int(tbl.get("dimension", 1)), boxes)
        if "volumes" in tbl:
            return Lattice.from_volumes(tbl["volumes"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: lattice: {exc}")
    raise ConfigError(f"{where}: lattice needs 'volumes' or 'boxes'")


def _parse_field(data: dict, lattice: Lattice, where: str) -> MeasureField:
    if "cell_measures" in data:
        entries = data["cell_measures"]
        if len(entries) != lattice.n_cells:
            raise ConfigError(
                f"{where}: cell_measures has {len(entries)} entries, "
                f"lattice has {lattice.n_cells} cells"
            )
        measures = tuple(
            _parse_measure(entry, f"{where}: cell_measures[{i}]")
            for i, entry in enumerate(entries)
        )
        return MeasureField(lattice, measures)
    if "measure" in data:
        measure = _parse_measure(data["measure"], f"{where}: measure")
        return MeasureField.uniform(lattice, measure)
    raise ConfigError(f"{where}: missing [measure] or [[cell_measures]]")


def _parse_measure(tbl, label: str) -> SpectralMeasure:
    if not isinstance(tbl, dict):
        raise ConfigError(f"{label}: expected a table")
    try:
        if "moments" in tbl:
            return MomentMeasure(tuple(tbl["moments"]))
        atoms = tuple((float(s), float(w)) for s, w in tbl.get("atoms", []))
        return DiscreteMeasure(float(tbl.get("zero_weight", 0.0)), atoms)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{label}: {exc}")


# ---------------------------------------------------------------------------
# output formatting
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, complex):
        sign = "+" if x.imag >= 0 else "-"
        return f"{x.real!r}{sign}{abs(x.imag)!r}j"
    return repr(float(x))


def rows_to_csv(rows: list[CheckRow]) -> str:
    lines = ["quantity,target,estimate,stderr,pass"]
    for row in rows:
        lines.append(
            f"{row.quantity},{_fmt(row.target)},{_fmt(row.estimate)},"
            f"{_fmt(row.stderr)},{'pass' if row.passed else 'fail'}"
        )
    return "\n".join(lines) + "\n"


def _write(out_dir: str, name: str, text: str) -> Path:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / name
    target.write_text(text)
    return target


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_recurrence(cfg: ExperimentConfig, out_dir: str | None) -> int:
    basis = ModeBasis.build(cfg.field, cfg.degree_cut)
    lines = []
    for j, table in enumerate(basis.tables):
        if cfg.field.lattice.n_cells > 1:
            lines.append(f"# cell={j}")
        lines.append("n,b_n,a_n,gamma_n")
        for n in range(len(table.b) + 1):
            b = _fmt(table.b[n]) if n < len(table.b) else ""
            a = _fmt(table.a[n - 1]) if 1 <= n <= len(table.a) else ""
            lines.append(f"{n},{b},{a},{_fmt(table.gamma[n])}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        _write(out_dir, "recurrence.csv", text)
    return 0


def cmd_simulate(cfg: ExperimentConfig, samples: int, seed: int, out: str) -> int:
    cfg.field.require_discrete("simulation")
    max_atoms = max(len(m.atoms) for m in cfg.field.cell_measures)
    header = "sample_index,cell,gaussian" + "".join(
        f",jump_{r}" for r in range(max_atoms)
    )
    lines = [header]
    for lo in range(0, samples, BATCH):
        batch = sample_batch(cfg.field, seed, lo, min(lo + BATCH, samples))
        for i in range(batch.size):
            for j in range(cfg.field.lattice.n_cells):
                counts = batch.jump_counts[j][i]
                jumps = [str(int(c)) for c in counts]
                jumps += [""] * (max_atoms - len(jumps))
                lines.append(
                    f"{lo + i},{j},{_fmt(batch.gaussian[i, j])}"
                    + "".join("," + s for s in jumps)
                )
    text = "\n".join(lines) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    return 0


def cmd_verify(cfg: ExperimentConfig, name: str, samples, seed, threads, out_dir) -> int:
    basis = ModeBasis.build(cfg.field, cfg.degree_cut)
    rows = run_check(
        name, basis, samples, seed, threads=threads, coeff_seed=seed,
        particle_cap=cfg.particle_cap,
    )
    text = rows_to_csv(rows)
    sys.stdout.write(text)
    _write(out_dir, f"verify_{name}.csv", text)
    return 0 if all(r.passed for r in rows) else 1


def cmd_report(cfg: ExperimentConfig, samples, seed, threads, out_dir) -> int:
    if not cfg.checks:
        return 0
    basis = ModeBasis.build(cfg.field, cfg.degree_cut)
    summary = ["check,rows,failures,status"]
    all_ok = True
    for name in cfg.checks:
        rows = run_check(
            name, basis, samples, seed, threads=threads, coeff_seed=seed,
            particle_cap=cfg.particle_cap,
        )
        _write(out_dir, f"verify_{name}.csv", rows_to_csv(rows))
        bad = sum(not r.passed for r in rows)
        all_ok = all_ok and bad == 0
        summary.append(f"{name},{len(rows)},{bad},{'pass' if bad == 0 else 'fail'}")
    text = "\n".join(summary) + "\n"
    sys.stdout.write(text)
    _write(out_dir, "report.csv", text)
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levychaos",
        description="Chaos decomposition experiments for white noise on a lattice",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--samples", type=int, help="override the sample count")
        p.add_argument("--threads", type=int, help="override the thread count")
        p.add_argument("--out-dir", help="override the output directory")

    p = sub.add_parser("recurrence", help="print recurrence tables as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")

    p = sub.add_parser("simulate", help="sample noise paths to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="-", help="output file ('-' for stdout)")

    p = sub.add_parser("verify", help="run one verification check")
    p.add_argument("name", choices=KNOWN_CHECKS)
    common(p)

    p = sub.add_parser("report", help="run the configured checks")
    common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        samples = getattr(args, "samples", None) or cfg.samples
        seed = args.seed if getattr(args, "seed", None) is not None else cfg.seed
        threads = getattr(args, "threads", None) or cfg.threads
        out_dir = getattr(args, "out_dir", None) or cfg.out_dir
        if args.command == "recurrence":
            return cmd_recurrence(cfg, args.out_dir)
        if args.command == "simulate":
            return cmd_simulate(cfg, samples, seed, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, args.name, samples, seed, threads, out_dir)
        if args.command == "report":
            return cmd_report(cfg, samples, seed, threads, out_dir)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LevyChaosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
