"""Command-line pipeline: build, estimate, select-dim, train, evaluate.

Exit codes: 0 success, 1 internal error, 2 usage or I/O error, 3 degenerate
data (no signal, corpus too small to split, repeated singular values).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys

import numpy as np

from . import corpus as corpus_mod
from . import embed, estimation, evaluation, selection
from . import signal as signal_mod
from .errors import (
    CorpusError,
    DegenerateSpectrumError,
    FormatError,
    NoSignalError,
    PipdimError,
)
from .perturbation import svd

log = logging.getLogger("pipdim")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(PipdimError):
    pass


def _write_json(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _check_paths(paths):
    for p in paths or ():
        if not os.path.exists(p):
            raise UsageError(f"no such file: {p}")


def _corpus_options(p):
    p.add_argument("--corpus", nargs="+", help="UTF-8 text file(s)")
    p.add_argument("--max-vocab", type=int, default=corpus_mod.DEFAULT_MAX_VOCAB)
    p.add_argument("--min-count", type=int, default=0)
    p.add_argument("--window", type=int, default=corpus_mod.DEFAULT_WINDOW)
    p.add_argument("--matrix", choices=signal_mod.KINDS, default="ppmi")
    p.add_argument("--shift", type=float, default=1.0, help="SPPMI negative-sampling shift")
    p.add_argument("--log-count-offset", action=argparse.BooleanOptionalAction, default=True,
                   help="use log(1 + C) (default) or log C on nonzero cells")


def _alpha(value):
    a = float(value)
    if not 0.0 <= a <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {value}")
    return a


def _positive_int(value):
    v = int(value)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return v


def _p_list(value):
    try:
        ps = tuple(float(x) for x in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p-list {value!r}") from None
    if not ps or any(p <= 0 for p in ps):
        raise argparse.ArgumentTypeError("p values must be positive")
    return tuple(int(p) if p.is_integer() else p for p in ps)


def build_parser():
    parser = argparse.ArgumentParser(prog="pipdim", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file; command-line flags win")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="count co-occurrences and write a signal matrix")
    _corpus_options(p)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("estimate", help="estimate noise and signal spectrum")
    _corpus_options(p)
    p.add_argument("--matrices", nargs=2, metavar=("HALF1", "HALF2"),
                   help="two prebuilt half-corpus matrices instead of --corpus")
    p.add_argument("--full", help="prebuilt full-corpus matrix (defaults to the halves' mean)")
    p.add_argument("--chunk-length", type=_positive_int, default=corpus_mod.DEFAULT_CHUNK_LENGTH)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".")

    p = sub.add_parser("select-dim", help="pick the PIP-loss minimizing dimensionality")
    p.add_argument("--estimate", help="JSON written by 'estimate'")
    p.add_argument("--spectrum", help="JSON list or one value per line (with --sigma, --n)")
    p.add_argument("--sigma", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=_alpha, default=0.5)
    p.add_argument("--trials", type=_positive_int, default=selection.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int)
    p.add_argument("--p-list", type=_p_list, default=selection.DEFAULT_P_LIST)
    p.add_argument("--method", choices=("mc", "theorem3", "both"), default="mc")
    p.add_argument("--out", default=".")

    p = sub.add_parser("train", help="factorize a signal matrix into an embedding")
    _corpus_options(p)
    p.add_argument("--matrix-file", help="prebuilt matrix (with --vocab) instead of --corpus")
    p.add_argument("--vocab", help="vocabulary file written by 'build'")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--alpha", type=_alpha, default=0.5)
    p.add_argument("--output", default="embedding.txt")

    p = sub.add_parser("evaluate", help="score an embedding on relatedness/analogy sets")
    p.add_argument("--embedding", required=True)
    p.add_argument("--relatedness", nargs="*", default=[])
    p.add_argument("--analogy", nargs="*", default=[])
    p.add_argument("--pearson", action="store_true")
    p.add_argument("--analogy-method", choices=("3cosadd", "3cosmul"), default="3cosadd")
    p.add_argument("--out", help="write results JSON here as well")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        _check_paths([args.config])
        # second pass: config values become defaults, explicit flags still win
        config = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in config.items():
            if key not in known:
                raise UsageError(f"{args.config}: unknown key {key!r} for '{args.command}'")
            action = known[key]
            if action.nargs in ("+", "*", 2):
                defaults[key] = raw.split()
            elif isinstance(action, argparse.BooleanOptionalAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                try:
                    defaults[key] = action.type(raw)
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise UsageError(f"{args.config}: bad value for {key!r}: {exc}") from None
            else:
                defaults[key] = raw
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _signal_from_counts(counts, args):
    return signal_mod.build_signal(counts, args.matrix, shift=args.shift, offset=args.log_count_offset)


def _corpus_params(args):
    return {
        "max_vocab": args.max_vocab,
        "min_count": args.min_count,
        "window": args.window,
        "matrix": args.matrix,
        "shift": args.shift,
        "log_count_offset": args.log_count_offset,
    }


def _load_stream(args):
    if not args.corpus:
        raise UsageError("--corpus is required")
    _check_paths(args.corpus)
    return corpus_mod.tokenize(corpus_mod.read_corpus(args.corpus), args.max_vocab, args.min_count)


def cmd_build(args):
    stream, vocab = _load_stream(args)
    counts = corpus_mod.count_cooccurrences(stream, vocab.size, args.window)
    sig = _signal_from_counts(counts, args)
    os.makedirs(args.out, exist_ok=True)
    corpus_mod.save_vocabulary(vocab, os.path.join(args.out, "vocab.tsv"))
    corpus_mod.save_counts(counts, os.path.join(args.out, "counts.txt"))
    signal_mod.save_matrix(sig, os.path.join(args.out, "matrix.bin"))
    record = {
        "n": vocab.size,
        "total_tokens": stream.total_tokens,
        "total_pairs": counts.total_pairs,
        "counts_digest": signal_mod.counts_digest(counts),
        "matrix_digest": sig.digest,
        "params": _corpus_params(args),
    }
    _write_json(record, os.path.join(args.out, "build.json"))


def _singular_values(values):
    return svd(values).D


def cmd_estimate(args):
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    if args.matrices:
        _check_paths(list(args.matrices) + ([args.full] if args.full else []))
        m1, m2 = (signal_mod.load_matrix(p) for p in args.matrices)
        full = signal_mod.load_matrix(args.full).values if args.full else (m1.values + m2.values) / 2
        params = {"matrices": list(args.matrices), "full": args.full}
    else:
        stream, vocab = _load_stream(args)
        # vocabulary is fixed on the full corpus before splitting
        half1, half2 = corpus_mod.split_corpus(stream, seed, args.chunk_length)
        n = vocab.size
        m1 = _signal_from_counts(corpus_mod.count_cooccurrences(half1, n, args.window), args)
        m2 = _signal_from_counts(corpus_mod.count_cooccurrences(half2, n, args.window), args)
        full = _signal_from_counts(corpus_mod.count_cooccurrences(stream, n, args.window), args).values
        params = {**_corpus_params(args), "chunk_length": args.chunk_length}
    noise = estimation.estimate_noise(m1, m2)
    n = full.shape[0]
    spec = estimation.estimate_spectrum_usvt(_singular_values(full), noise.sigma_hat, n)
    record = {
        "sigma_hat": noise.sigma_hat,
        "lambda_hat": spec.signal.tolist(),
        "effective_rank": spec.effective_rank,
        "threshold": spec.threshold,
        "params": {**params, "n": n, "seed": seed},
    }
    os.makedirs(args.out, exist_ok=True)
    _write_json(record, os.path.join(args.out, "estimate.json"))
    if spec.effective_rank == 0:
        raise NoSignalError("no signal: every singular value is below the USVT threshold")


def _read_spectrum(path):
    with open(path) as fh:
        text = fh.read()
    try:
        values = json.loads(text)
    except json.JSONDecodeError:
        values = [float(x) for x in text.split()]
    if isinstance(values, dict):
        values = values["lambda_hat"]
    return np.asarray(values, dtype=np.float64)


def cmd_select(args):
    if args.estimate:
        _check_paths([args.estimate])
        with open(args.estimate) as fh:
            est = json.load(fh)
        lam = np.asarray(est["lambda_hat"], dtype=np.float64)
        sigma = est["sigma_hat"] if args.sigma is None else args.sigma
        n = est["params"]["n"] if args.n is None else args.n
    elif args.spectrum:
        _check_paths([args.spectrum])
        if args.sigma is None or args.n is None:
            raise UsageError("--spectrum needs --sigma and --n")
        lam, sigma, n = _read_spectrum(args.spectrum), args.sigma, args.n
    else:
        raise UsageError("give --estimate or --spectrum")
    lam = lam[lam > 0]
    if lam.size == 0:
        raise NoSignalError("no signal detected")
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    methods = ("mc", "theorem3") if args.method == "both" else (args.method,)
    os.makedirs(args.out, exist_ok=True)
    results = {}
    for m in methods:
        if m == "mc":
            curve = selection.monte_carlo_pip_curve(lam, sigma, args.alpha, n, trials=args.trials, seed=seed)
        else:
            curve = selection.theorem3_curve(lam, sigma, args.alpha, n)
        iv = selection.suboptimal_intervals(curve, args.p_list)
        curve.to_csv(os.path.join(args.out, f"curve_{m}.csv"))
        results[m] = {"k_star": iv.k_star, "intervals": iv.to_dict(), "curve": curve.to_dict()}
    record = results[methods[0]] if len(methods) == 1 else results
    record = {**record, "params": {"alpha": args.alpha, "sigma": sigma, "n": n,
                                    "trials": args.trials, "seed": seed, "method": args.method}}
    _write_json(record, os.path.join(args.out, "selection.json"))


def cmd_train(args):
    if args.matrix_file:
        _check_paths([args.matrix_file, args.vocab] if args.vocab else [args.matrix_file])
        if not args.vocab:
            raise UsageError("--matrix-file needs --vocab")
        sig = signal_mod.load_matrix(args.matrix_file)
        vocab = corpus_mod.load_vocabulary(args.vocab)
    else:
        stream, vocab = _load_stream(args)
        counts = corpus_mod.count_cooccurrences(stream, vocab.size, args.window)
        sig = _signal_from_counts(counts, args)
    if sig.n != vocab.size:
        raise UsageError(f"matrix has {sig.n} rows but vocabulary has {vocab.size} tokens")
    if args.k > vocab.size:
        raise UsageError(f"--k {args.k} exceeds the vocabulary size {vocab.size}")
    E = embed.factorize_embedding(sig, args.k, args.alpha)
    embed.export_embedding(E, vocab, args.output)
    _write_json({"output": args.output, "k": args.k, "alpha": args.alpha, "info": E.info}, None)


def cmd_evaluate(args):
    _check_paths([args.embedding] + list(args.relatedness) + list(args.analogy))
    E, tokens = embed.import_embedding(args.embedding)
    out = {"relatedness": {}, "analogy": {}}
    method = "pearson" if args.pearson else "spearman"
    for path in args.relatedness:
        r = evaluation.relatedness_correlation(E, tokens, evaluation.load_relatedness(path), method)
        out["relatedness"][path] = {"correlation": r.correlation, "coverage": r.coverage,
                                    "pairs": r.pairs_used, "method": method}
    for path in args.analogy:
        a = evaluation.analogy_accuracy(E, tokens, evaluation.load_analogy(path), args.analogy_method)
        out["analogy"][path] = {"accuracy": a.accuracy, "coverage": a.coverage,
                                "questions": a.questions_used, "method": args.analogy_method}
    _write_json(out, args.out)


COMMANDS = {
    "build": cmd_build,
    "estimate": cmd_estimate,
    "select-dim": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
}


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except (UsageError, FormatError, OSError) as exc:
        print(f"pipdim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        COMMANDS[args.command](args)
    except (NoSignalError, CorpusError, DegenerateSpectrumError) as exc:
        print(f"pipdim: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (UsageError, FormatError, OSError) as exc:
        print(f"pipdim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"pipdim: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
