"""Command-line entry point: ``pathreason <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from .errors import (
    AllPathsFailed,
    ClientError,
    ExtractionError,
    FixtureMiss,
    GraphFormatError,
    InvalidPath,
    NotApplicable,
    ReasoningError,
    SchemaError,
    UnknownNode,
    UnknownRelationLabel,
    UnsupportedDomain,
)
from .evaluation import (
    BASELINE_MODES,
    FORMATS,
    EvalConfig,
    Report,
    load_dataset,
    run_baseline,
    run_pot,
    run_robustness_study,
)
from .graph import format_graph, iter_graph_records
from .llm import ClientConfig, FixtureStore, HTTPClient, MockClient
from .noise import NOISE_TYPES, NoiseSpec, format_corpus, generate_gold_corpus, inject_n, read_corpus
from .paths import DEFAULT_MAX_LEN, DEFAULT_MAX_PATHS, find_paths, format_path
from .pipeline import MODES, extract_graph, reason_over_graph
from .vocab import DOMAINS

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_FIXTURE_MISS = 4
EXIT_CLIENT = 5
EXIT_DISCONNECTED = 6
EXIT_REASONING = 7
EXIT_DATA = 8

EXIT_CODES_HELP = """\
exit codes:
  0  success
  1  unexpected internal error
  2  usage error (bad flag, unknown domain, bad config file)
  3  unparseable input (extraction output or graph file)
  4  fixture-miss: --mock has no recorded completion for a prompt
  5  LLM client error (auth, rate limit, timeout, malformed response)
  6  disconnected query: no path joins the queried entities ([] printed)
  7  reasoning failure: every path failed to produce an answer
  8  dataset or schema error

configuration precedence: command-line flags > --config file > built-in defaults.
The config file holds one "key = value" per line (# starts a comment); keys are
the long flag names with dashes or underscores, e.g. "max-paths = 32".
"""

BUNDLED_PREFIX = "bundled:"
_OUTPUT_KEYS = {"out", "report", "csv", "config", "record", "func", "command"}


class UsageError(Exception):
    pass


def _bundled(name: str) -> Path:
    root = resources.files("pathreason").joinpath("assets/fixtures")
    return Path(str(root.joinpath(name)))


def resolve_dataset(value: str) -> Path:
    """``bundled:<name>`` names a packaged fixture corpus; anything else is a path."""
    if value.startswith(BUNDLED_PREFIX):
        return _bundled(value[len(BUNDLED_PREFIX):]) / "dataset.jsonl"
    return Path(value)


def _types(value: str) -> tuple[str, ...]:
    value = value.replace(" ", "")
    if value.upper() in ("ALL", "A..G", "A-G"):
        return tuple(NOISE_TYPES)
    out = tuple(t.upper() for t in value.split(",") if t)
    for t in out:
        if t not in NOISE_TYPES:
            raise argparse.ArgumentTypeError(f"unknown noise type {t!r}")
    return out


def _int_range(value: str) -> tuple[int, int]:
    parts = value.replace("..", "-").split("-")
    try:
        nums = [int(p) for p in parts if p != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {value!r}") from None
    if len(nums) == 1:
        return nums[0], nums[0]
    if len(nums) != 2 or nums[0] > nums[1]:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {value!r}")
    return nums[0], nums[1]


def _add_common(p: argparse.ArgumentParser, *, domain: bool = True) -> None:
    if domain:
        p.add_argument("--domain", choices=DOMAINS, default="stepgame")
    p.add_argument("--config", help="key = value file supplying defaults for any flag")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")


def _add_client(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("LLM client")
    g.add_argument("--mock", nargs="?", const=BUNDLED_PREFIX + "stepgame_smoke", default=None, metavar="DIR",
                   help="replay recorded completions from DIR (default: the bundled smoke fixtures) instead of calling an API")
    g.add_argument("--record", metavar="DIR", help="store every live completion under DIR for later --mock replay")
    g.add_argument("--base-url", default=ClientConfig.base_url)
    g.add_argument("--model", default=ClientConfig.model)
    g.add_argument("--temperature", type=float, default=ClientConfig.temperature)
    g.add_argument("--max-tokens", type=int, default=ClientConfig.max_tokens)
    g.add_argument("--timeout", type=float, default=ClientConfig.request_timeout)
    g.add_argument("--retries", type=int, default=ClientConfig.max_retries)
    g.add_argument("--concurrency", type=int, default=ClientConfig.max_concurrency)


def _add_limits(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN, help="longest path considered, in edges")
    p.add_argument("--max-paths", type=int, default=DEFAULT_MAX_PATHS, help="paths kept per query")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathreason",
        description="Relational reasoning over extracted graphs by enumerating reasoning paths.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("extract", help="story text to graph file via the LLM", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    _add_client(p)
    p.add_argument("story", nargs="?", help="story text; omit to use --file")
    p.add_argument("--file", help="file with one story per line ('-' for stdin)")
    p.add_argument("--out", help="graph file to write (default: stdout)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("solve", help="answer the query of a graph file", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    _add_client(p)
    _add_limits(p)
    p.add_argument("graph", help="graph file with a Q line")
    p.add_argument("--mode", choices=MODES, default="symbolic")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("paths", help="list reasoning paths of a graph file", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    _add_limits(p)
    p.add_argument("graph")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("eval", help="evaluate a pipeline or baseline on a dataset", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    _add_client(p)
    _add_limits(p)
    p.add_argument("--dataset", required=True, help=f"dataset path, or {BUNDLED_PREFIX}stepgame_smoke")
    p.add_argument("--format", choices=FORMATS, help="dataset format (default: from the file suffix)")
    p.add_argument("--mode", choices=MODES + BASELINE_MODES, default="symbolic")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sc-rounds", type=int, default=5)
    p.add_argument("--report", help="write the JSON report here (.txt suffix writes the text table)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="write a synthetic gold corpus", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--hops", type=_int_range, default=None, help="hop range LO-HI (default 1-10 stepgame, 2-6 clutrr)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="corpus file to write (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("perturb", help="inject noise into a gold corpus", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    p.add_argument("--dataset", help="gold corpus file; omit to generate one with --count/--hops")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--hops", type=_int_range, default=None)
    p.add_argument("--types", type=_types, default=tuple(NOISE_TYPES), help="comma list of A..G (default: all)")
    p.add_argument("--n", type=int, default=1, help="noise operations per sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="corpus file to write (default: stdout)")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("robustness", help="path-based vs whole-graph accuracy under noise", epilog=EXIT_CODES_HELP, formatter_class=fmt)
    _add_common(p)
    _add_limits(p)
    p.add_argument("--count", type=int, default=100, help="gold samples per noise type")
    p.add_argument("--hops", type=_int_range, default=None)
    p.add_argument("--n", type=_int_range, default=(0, 5), help="range of noise counts, e.g. 0-5")
    p.add_argument("--types", type=_types, default=tuple(NOISE_TYPES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--csv", help="CSV table path")
    p.set_defaults(func=cmd_robustness)
    return parser


# ---------------------------------------------------------------- config


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
        if isinstance(action, argparse._SubParsersAction) and name in action.choices:
            return action.choices[name]
    raise UsageError(f"unknown command {name!r}")


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    sub = _subparser(parser, args.command)
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in read_config(args.config).items():
        action = known.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"config key {key!r} is not an option of {args.command}")
        if action.nargs == 0:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
            continue
        convert = action.type or (lambda v: v)
        try:
            converted = convert(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and converted not in action.choices:
            raise UsageError(f"config key {key!r}: {converted!r} not in {list(action.choices)}")
        defaults[key] = converted
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def run_config(args: argparse.Namespace) -> dict:
    """Resolved settings echoed into reports; output locations are left out so reruns compare byte for byte."""
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in _OUTPUT_KEYS or key == "verbose":
            continue
        echo[key] = list(value) if isinstance(value, tuple) else value
    return echo


# ---------------------------------------------------------------- helpers


def make_client(args: argparse.Namespace):
    config = ClientConfig(
        base_url=args.base_url,
        model=args.model,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        request_timeout=args.timeout,
        max_retries=args.retries,
        max_concurrency=args.concurrency,
    )
    if args.mock:
        root = args.mock
        if root.startswith(BUNDLED_PREFIX):
            path = _bundled(root[len(BUNDLED_PREFIX):]) / "completions"
        else:
            path = Path(root)
            if (path / "completions").is_dir():
                path = path / "completions"
        return MockClient(FixtureStore(path), config)
    recorder = FixtureStore(args.record) if args.record else None
    return HTTPClient(config, recorder=recorder)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_one_graph(args: argparse.Namespace):
    text = Path(args.graph).read_text(encoding="utf-8")
    records = list(iter_graph_records(text, args.domain))
    if not records:
        raise GraphFormatError("graph file is empty")
    return records


# ---------------------------------------------------------------- commands


def cmd_extract(args: argparse.Namespace) -> int:
    if args.story and args.file:
        raise UsageError("give a story or --file, not both")
    if args.file:
        stream = sys.stdin if args.file == "-" else open(args.file, encoding="utf-8")
        with stream:
            stories = [line.strip() for line in stream if line.strip()]
    elif args.story:
        stories = [args.story]
    else:
        raise UsageError("no story given")
    client = make_client(args)
    blocks = []
    for i, story in enumerate(stories):
        parsed = extract_graph(args.domain, story, client)
        for w in parsed.warnings:
            print(f"warning: story {i + 1}: {w}", file=sys.stderr)
        sample_id = f"story-{i + 1}" if len(stories) > 1 else None
        blocks.append(format_graph(parsed.to_graph(), parsed.query, sample_id=sample_id))
    _write(args.out, "\n".join(blocks))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    records = _load_one_graph(args)
    client = make_client(args) if args.mode == "llm" else None
    code = EXIT_OK
    for rec in records:
        if rec.query is None:
            raise GraphFormatError("graph file has no 'Q <src> <tar>' line")
        out = reason_over_graph(
            rec.graph, rec.query, args.mode, client=client, max_len=args.max_len, max_paths=args.max_paths
        )
        prefix = f"{rec.sample_id}\t" if rec.sample_id and len(records) > 1 else ""
        print(prefix + "[" + ", ".join(sorted(out.predicted)) + "]")
        for i, p in enumerate(out.paths):
            answer = "[" + ", ".join(sorted(p.answer)) + "]" if p.error is None else f"error: {p.error}"
            print(f"  {i}\t{format_path(p.path)}\t{answer}")
        if out.status == "disconnected-query":
            code = max(code, EXIT_DISCONNECTED)
        elif out.status == "all-paths-failed":
            code = max(code, EXIT_REASONING)
    return code


def cmd_paths(args: argparse.Namespace) -> int:
    code = EXIT_OK
    for rec in _load_one_graph(args):
        if rec.query is None:
            raise GraphFormatError("graph file has no 'Q <src> <tar>' line")
        paths = find_paths(rec.graph, rec.query, args.max_len, args.max_paths)
        if rec.sample_id:
            print(f"# {rec.sample_id}")
        for p in paths:
            print(format_path(p))
        if not paths:
            code = EXIT_DISCONNECTED
    return code


def cmd_eval(args: argparse.Namespace) -> int:
    records = load_dataset(resolve_dataset(args.dataset), args.format, args.domain)
    cfg = EvalConfig(args.max_len, args.max_paths, args.workers, args.sc_rounds)
    needs_client = args.mode in BASELINE_MODES or args.mode == "llm" or any(r.graph is None for r in records)
    client = make_client(args) if needs_client else None
    if args.mode in MODES:
        results = run_pot(records, args.mode, client, cfg)
        mode = f"pot-{args.mode}"
    else:
        results = run_baseline(records, args.mode, client, cfg)
        mode = args.mode
    report = Report(mode, args.domain, results, run_config(args))
    sys.stdout.write(report.to_text())
    if args.report:
        _write(args.report, report.to_text() if args.report.endswith(".txt") else report.to_json())
    statuses = {r.diagnostics.get("status") for r in results}
    if statuses == {"fixture-miss"}:
        return EXIT_FIXTURE_MISS
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    if args.domain not in ("stepgame", "clutrr"):
        raise UsageError("generate supports --domain stepgame or clutrr")
    hops = args.hops or ((2, 6) if args.domain == "clutrr" else (1, 10))
    _write(args.out, format_corpus(generate_gold_corpus(args.domain, args.count, hops, args.seed)))
    return EXIT_OK


def cmd_perturb(args: argparse.Namespace) -> int:
    if args.dataset:
        samples = read_corpus(resolve_dataset(args.dataset), args.domain)
    else:
        if args.domain not in ("stepgame", "clutrr"):
            raise UsageError("perturb generates stepgame or clutrr corpora")
        hops = args.hops or ((2, 6) if args.domain == "clutrr" else (1, 10))
        samples = generate_gold_corpus(args.domain, args.count, hops, args.seed)
    spec = NoiseSpec(args.types, args.n, args.seed)
    _write(args.out, format_corpus(inject_n(s, spec) for s in samples))
    return EXIT_OK


def cmd_robustness(args: argparse.Namespace) -> int:
    if args.domain not in ("stepgame", "clutrr"):
        raise UsageError("robustness supports --domain stepgame or clutrr")
    report = run_robustness_study(
        args.domain,
        per_type_count=args.count,
        n_range=range(args.n[0], args.n[1] + 1),
        seed=args.seed,
        hop_range=args.hops,
        types=args.types,
        config=EvalConfig(args.max_len, args.max_paths),
    )
    sys.stdout.write(report.to_text())
    if args.report:
        _write(args.report, report.to_json())
    if args.csv:
        _write(args.csv, report.to_csv())
    return EXIT_OK


# ---------------------------------------------------------------- main


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, UnsupportedDomain)):
        return EXIT_USAGE
    if isinstance(exc, FixtureMiss):
        return EXIT_FIXTURE_MISS
    if isinstance(exc, ClientError):
        return EXIT_CLIENT
    if isinstance(exc, (ExtractionError, GraphFormatError)):
        return EXIT_PARSE
    if isinstance(exc, UnknownNode):
        return EXIT_DISCONNECTED
    if isinstance(exc, (AllPathsFailed, ReasoningError)):
        return EXIT_REASONING
    if isinstance(exc, (SchemaError, InvalidPath, UnknownRelationLabel, NotApplicable, OSError, json.JSONDecodeError)):
        return EXIT_DATA
    return EXIT_UNEXPECTED


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"pathreason: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        code = _exit_code(exc)
        if code == EXIT_DISCONNECTED:
            print("[]")
        print(f"pathreason: {type(exc).__name__}: {exc}", file=sys.stderr)
        if code == EXIT_UNEXPECTED and args.verbose:
            raise
        return code


if __name__ == "__main__":
    sys.exit(main())
