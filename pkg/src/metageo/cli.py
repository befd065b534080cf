"""Command-line front end.

Word commands read one word per line and write one JSON record per line;
``steiner`` and ``tsp`` read one JSON instance per line.  Exit codes: 0 ok,
1 some input line failed, 2 bad configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import random
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

from . import lattice_tsp, metabelian, steiner, wreath
from .caps import Caps, default_caps
from .errors import MetageoError
from .words import Alphabet, enumerate_reduced_words, format_word, parse_word, random_reduced_word

log = logging.getLogger("metageo")

COMMANDS = ("normal-form", "geodesic-wreath", "geodesic-metabelian", "flow", "steiner", "tsp",
            "oracle-check", "bench")

SOLVERS = {
    "normal-form": ("exact",),
    "flow": ("exact",),
    "geodesic-wreath": ("exact", "line-exact", "heuristic", "mst"),
    "geodesic-metabelian": ("exact", "heuristic", "mst"),
    "steiner": ("exact", "heuristic", "mst"),
    "tsp": ("exact", "line-exact", "heuristic", "mst", "bruteforce"),
    "oracle-check": ("exact", "line-exact", "heuristic", "mst"),
    "bench": ("exact", "heuristic", "mst"),
}

EXIT_OK, EXIT_WORD_ERRORS, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    group: wreath.GroupSpec | None = None
    rank: int | None = None
    solver: str = "exact"
    output_format: str = "json"
    seed: int = 0
    caps: Caps = field(default_factory=Caps)
    compare: bool = False
    radius: int = 6
    samples: int = 0
    sizes: tuple[int, ...] = tuple(range(5, 13))
    repeats: int = 3

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.solver not in SOLVERS[self.command]:
            raise ConfigError(f"solver {self.solver!r} is not valid for {self.command}; "
                              f"choose from {', '.join(SOLVERS[self.command])}")
        wants_group = self.command in ("normal-form", "geodesic-wreath")
        wants_rank = self.command in ("geodesic-metabelian", "flow")
        if wants_group and self.group is None:
            raise ConfigError(f"{self.command} needs --group")
        if wants_rank and self.rank is None:
            raise ConfigError(f"{self.command} needs --rank")
        if self.command == "oracle-check" and (self.group is None) == (self.rank is None):
            raise ConfigError("oracle-check needs exactly one of --group and --rank")
        if self.rank is not None and self.rank < 1:
            raise ConfigError("--rank must be >= 1")
        if self.output_format not in ("json", "text"):
            raise ConfigError("--format must be json or text")

    @property
    def alphabet(self) -> Alphabet:
        if self.group is not None:
            return self.group.alphabet
        return Alphabet.metabelian(self.rank)


@dataclass
class ResultRecord:
    input: str
    method: str
    length: int | None = None
    estimate: int | None = None
    exact: int | None = None
    ratio: float | None = None
    wall_ms: float = 0.0
    word: str | None = None
    data: dict | None = None
    error: str | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_text(self) -> str:
        if self.error is not None:
            return f"{self.input}\tERROR\t{self.error}"
        value = self.length if self.length is not None else self.estimate
        parts = [self.input, self.method, "" if value is None else str(value)]
        if self.ratio is not None:
            parts.append(f"ratio={self.ratio:.4f}")
        if self.word is not None:
            parts.append(self.word)
        if self.data is not None and value is None:
            parts.append(json.dumps(self.data, sort_keys=True))
        return "\t".join(parts)


def _ratio(estimate: int, exact: int) -> float:
    return 1.0 if exact == 0 else estimate / exact


def _word_record(config: RunConfig, text: str) -> ResultRecord:
    w = parse_word(text, config.alphabet)
    cmd, solver = config.command, config.solver
    if cmd == "normal-form":
        g = wreath.normal_form(w, config.group)
        return ResultRecord(text, "normal-form", data=wreath.element_to_json(g))
    if cmd == "flow":
        f = metabelian.compute_flow(w, config.rank)
        return ResultRecord(text, "flow", data=metabelian.flow_to_json(f))
    if cmd == "geodesic-wreath":
        spec = config.group
        g = wreath.evaluate(w, spec)
        cap = config.caps.walk_targets
        value = wreath.geodesic_length_wreath(g, spec, solver, cap)
        word = format_word(wreath.geodesic_word_wreath(g, spec, solver, cap))
        method = f"wreath-{solver}"
        if solver == "exact" and len(g.support) > cap:
            method, solver = "wreath-exact-fallback-heuristic", "heuristic"
        rec = ResultRecord(text, method, word=word)
        if solver in ("exact", "line-exact"):
            rec.length = value
        else:
            rec.estimate = value
            if config.compare and len(g.support) <= cap:
                rec.exact = wreath.geodesic_length_wreath(g, spec, "exact", cap)
                rec.ratio = _ratio(value, rec.exact)
        return rec
    if cmd == "geodesic-metabelian":
        rank = config.rank
        if solver == "exact":
            word = metabelian.geodesic_word_metabelian(w, rank, "group")
            return ResultRecord(text, "metabelian-exact", length=len(word), word=format_word(word))
        inner = "exact" if solver == "heuristic" else "mst"
        approx = metabelian.geodesic_length_2approx(w, rank, inner)
        word = metabelian.geodesic_word_metabelian(w, rank, inner)
        rec = ResultRecord(text, f"metabelian-representatives-{inner}", estimate=approx.estimate,
                           word=format_word(word),
                           data={"flow_term": approx.exact_flow_term, "tree_length": approx.tree_length})
        if config.compare:
            rec.exact = metabelian.geodesic_length_exact(w, rank)
            rec.ratio = _ratio(approx.estimate, rec.exact)
        return rec
    raise ConfigError(f"{cmd} does not take words")  # pragma: no cover


def _instance_record(config: RunConfig, text: str) -> ResultRecord:
    data = json.loads(text)
    solver = config.solver
    if config.command == "tsp":
        inst = lattice_tsp.instance_from_json(data)
        if solver == "bruteforce":
            sol = lattice_tsp.permutation_bruteforce(inst, config.caps.bruteforce_targets)
        else:
            sol = lattice_tsp.solve_walk(inst, solver, config.caps.walk_targets)
        method = f"tsp-{solver}"
        over_cap = len(inst.targets) > config.caps.walk_targets
        if solver == "exact" and over_cap:
            method, solver = "tsp-exact-fallback-heuristic", "heuristic"
        rec = ResultRecord(text, method, data=lattice_tsp.solution_to_json(sol))
        if solver in ("exact", "line-exact", "bruteforce"):
            rec.length = sol.length
        else:
            rec.estimate = sol.length
            if config.compare and not over_cap:
                rec.exact = lattice_tsp.exact_walk_held_karp(inst, config.caps.walk_targets).length
                rec.ratio = _ratio(sol.length, rec.exact)
        return rec
    inst = steiner.instance_from_json(data)
    if isinstance(inst, steiner.SteinerInstance):
        if solver == "mst":
            tree = steiner.mst_terminals_approx(inst)
        else:
            tree = steiner.rsmt_exact(inst, config.caps.steiner_terminals)
        method = "rsmt-mst" if solver == "mst" else "rsmt-exact"
    else:
        if solver == "exact":
            tree = steiner.group_steiner_exact(inst, max_vertices=config.caps.group_vertices,
                                               max_groups=config.caps.group_terminals)
            method = "group-exact"
        else:
            inner = "exact" if solver == "heuristic" else "mst"
            tree = steiner.group_steiner_via_representatives(inst, inner, config.caps.steiner_terminals)
            method = f"group-representatives-{inner}"
    rec = ResultRecord(text, method, data=steiner.tree_to_json(tree))
    if method in ("rsmt-exact", "group-exact"):
        rec.length = tree.total_length
    else:
        rec.estimate = tree.total_length
    return rec


def process_line(config: RunConfig, text: str) -> ResultRecord:
    """Evaluate one input line; failures become an ``error`` record."""
    t0 = time.perf_counter()
    try:
        if config.command in ("steiner", "tsp"):
            rec = _instance_record(config, text)
        else:
            rec = _word_record(config, text)
    except (MetageoError, ValueError, KeyError, TypeError) as exc:
        rec = ResultRecord(text, config.command, error=f"{type(exc).__name__}: {exc}")
    rec.wall_ms = round((time.perf_counter() - t0) * 1000, 3)
    return rec


def _payload_lines(lines: Iterable[str], json_input: bool) -> Iterator[str]:
    for line in lines:
        line = line.rstrip("\n")
        if line.lstrip().startswith("#"):
            continue
        if json_input and not line.strip():
            continue
        yield line


def run(config: RunConfig, lines: Iterable[str], jobs: int = 1) -> Iterator[ResultRecord]:
    """One record per input line, in input order."""
    payload = _payload_lines(lines, config.command in ("steiner", "tsp"))
    if jobs <= 1:
        for text in payload:
            yield process_line(config, text)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(process_line, itertools.repeat(config), payload, chunksize=16)


def oracle_check(config: RunConfig) -> dict:
    """Compare a solver with breadth-first ground truth on reduced words up to ``radius`` letters.

    With ``samples`` > 0, that many words are drawn with the seed instead of
    enumerating all of them.
    """
    bound = config.radius
    alphabet = config.alphabet
    if config.samples > 0:
        rng = random.Random(config.seed)
        words = [random_reduced_word(alphabet, rng.randint(0, bound), rng)
                 for _ in range(config.samples)]
    else:
        words = list(enumerate_reduced_words(alphabet, bound))

    if config.group is not None:
        spec = config.group
        ball = wreath.wreath_ball(spec, bound, config.caps.bfs_states)

        def solve(w):
            g = wreath.evaluate(w, spec)
            return wreath.geodesic_length_wreath(g, spec, config.solver, config.caps.walk_targets), ball[g]
        group = str(spec)
    else:
        rank = config.rank
        ball = metabelian.metabelian_ball(rank, bound, config.caps.bfs_states)

        def solve(w):
            truth = ball[metabelian.compute_flow(w, rank)]
            if config.solver == "exact":
                return metabelian.geodesic_length_exact(w, rank), truth
            inner = "exact" if config.solver == "heuristic" else "mst"
            return metabelian.geodesic_length_2approx(w, rank, inner).estimate, truth
        group = f"F{rank}/F''"

    mismatches = below = 0
    ratios = []
    worst = None
    worst_ratio = -1.0
    for w in words:
        value, truth = solve(w)
        if value != truth:
            mismatches += 1
        if value < truth:
            below += 1
        r = _ratio(value, truth)
        ratios.append(r)
        if r > worst_ratio:
            worst_ratio, worst = r, w
    max_ratio = max(ratios) if ratios else 1.0
    return {
        "group": group,
        "solver": config.solver,
        "bound": bound,
        "mode": "sampled" if config.samples > 0 else "exhaustive",
        "checked": len(words),
        "mismatches": mismatches,
        "below_oracle": below,
        "max_ratio": max_ratio,
        "max_excess": max_ratio - 1.0,
        "mean_ratio": statistics.fmean(ratios) if ratios else 1.0,
        "worst_word": format_word(worst) if worst is not None else "",
    }


def bench_instances(seed: int, sizes: Iterable[int], repeats: int) -> dict[int, list]:
    rng = random.Random(seed)
    return {n: [lattice_tsp.random_instance(rng, n, dim=2, span=20) for _ in range(repeats)]
            for n in sizes}


def bench(config: RunConfig) -> list[dict]:
    """Median wall time per instance size for the exact and heuristic walk solvers."""
    instances = bench_instances(config.seed, config.sizes, config.repeats)
    rows = []
    for n, insts in instances.items():
        row: dict = {"size": n}
        exact_lengths = []
        for name, solve in (
            ("held_karp", lambda i: lattice_tsp.exact_walk_held_karp(i, max(config.caps.walk_targets, n))),
            ("nn_2opt", lambda i: lattice_tsp.approx_walk(i, "nearest-neighbor+2opt")),
            ("mst_shortcut", lambda i: lattice_tsp.approx_walk(i, "mst-shortcut")),
        ):
            times, lengths = [], []
            for inst in insts:
                t0 = time.perf_counter()
                lengths.append(solve(inst).length)
                times.append((time.perf_counter() - t0) * 1000)
            row[f"{name}_median_ms"] = round(statistics.median(times), 3)
            if name == "held_karp":
                exact_lengths = lengths
            else:
                row[f"{name}_max_ratio"] = round(max(_ratio(a, b) for a, b in zip(lengths, exact_lengths)), 4)
        rows.append(row)
    crossover = next((r["size"] for r in rows if r["held_karp_median_ms"] > r["nn_2opt_median_ms"]), None)
    for r in rows:
        r["heuristic_faster_from"] = crossover
    return rows


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metageo",
                                description="Geodesics in wreath products and free metabelian groups.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--group", help="wreath product, e.g. 'Z2 wr Z^2'")
    p.add_argument("--rank", type=int, help="rank of the free metabelian group")
    p.add_argument("--solver", default="exact")
    p.add_argument("--format", dest="output_format", default="json", choices=("json", "text"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-exact", type=int, help="cap for exact solvers (overrides METAGEO_MAX_EXACT)")
    p.add_argument("--radius", type=int, default=6, help="word-length bound for oracle-check")
    p.add_argument("--samples", type=int, default=0, help="oracle-check: sample this many words")
    p.add_argument("--sizes", default="5-12", help="bench: instance sizes, e.g. '5-18' or '5,8,12'")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--compare", action="store_true", help="also compute the exact value and ratio")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--input", default="-", help="input path, or '-' for stdin")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _parse_sizes(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part.strip():
            out.append(int(part))
    return tuple(out)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        caps = default_caps().with_max_exact(args.max_exact)
        group = wreath.parse_group_spec(args.group) if args.group else None
        return RunConfig(command=args.command, group=group, rank=args.rank, solver=args.solver,
                         output_format=args.output_format, seed=args.seed, caps=caps,
                         compare=args.compare, radius=args.radius, samples=args.samples,
                         sizes=_parse_sizes(args.sizes), repeats=args.repeats)
    except (ValueError, MetageoError) as exc:
        raise ConfigError(str(exc)) from None


def _emit(obj, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    elif isinstance(obj, dict):
        out.write("\t".join(f"{k}={v}" for k, v in obj.items()) + "\n")
    else:
        out.write(str(obj) + "\n")


def main(argv: list[str] | None = None, stdin=None, stdout=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"metageo: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if config.command == "oracle-check":
        try:
            report = oracle_check(config)
        except MetageoError as exc:
            print(f"metageo: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        _emit(report, config.output_format, stdout)
        exact = config.solver in ("exact", "line-exact")
        failed = report["mismatches"] if exact else report["below_oracle"]
        return EXIT_WORD_ERRORS if failed else EXIT_OK
    if config.command == "bench":
        for row in bench(config):
            _emit(row, config.output_format, stdout)
        return EXIT_OK

    try:
        source = stdin if args.input == "-" else open(args.input, encoding="utf-8")
    except OSError as exc:
        print(f"metageo: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    status = EXIT_OK
    try:
        for rec in run(config, source, args.jobs):
            if rec.error is not None:
                status = EXIT_WORD_ERRORS
            if config.output_format == "json":
                _emit(rec.to_json(), "json", stdout)
            else:
                stdout.write(rec.to_text() + "\n")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"metageo: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if source is not stdin:
            source.close()
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
