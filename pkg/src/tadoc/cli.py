"""Command-line surface: compress, decompress, analyze, features, bench.

Analytics results go to stdout (TSV by default, `--output json` for a
versioned schema); logs and summaries go to stderr. Exit codes: 0 ok,
2 usage, 3 malformed container, 4 corpus error.
"""

from __future__ import annotations

import argparse
import gzip as gzip_mod
import json
import os
import statistics
import sys
import tempfile
import time

from . import __version__, kernels, oracle
from .corpus import CorpusError, decode_stream, encode_corpus, tokenize
from .container import ContainerError, read_container, read_header, write_container
from .dag import coarsen, extract_features, load_merge_graph
from .scheduler import ORDER_SENSITIVE, run_parallel, select_variant
from .sequitur import expand, infer_grammar

TASK_NAMES = {
    "word-count": "word_count",
    "sort": "sort",
    "inverted-index": "inverted_index",
    "term-vector": "term_vector",
    "sequence-count": "sequence_count",
    "ranked-inverted-index": "ranked_inverted_index",
    "tfidf": "tfidf",
}

VARIANT_NAMES = {
    "postorder": "postorder",
    "preorder-set": "preorder_set",
    "preorder-bitmap": "preorder_bitmap",
    "preorder-twolevel": "preorder_twolevel",
}


def _log(message: str) -> None:
    print(message, file=sys.stderr)


# -- input collection ------------------------------------------------------------


def _collect_paths(inputs: list[str], file_list: str | None) -> list[tuple[str, str]]:
    """(display name, filesystem path) pairs, deterministic order."""
    pairs: list[tuple[str, str]] = []
    for item in inputs:
        if os.path.isdir(item):
            for root, dirnames, filenames in os.walk(item):
                dirnames.sort()
                for filename in sorted(filenames):
                    path = os.path.join(root, filename)
                    pairs.append((os.path.relpath(path, item), path))
        elif os.path.isfile(item):
            pairs.append((item, item))
        else:
            raise CorpusError(f"no such file or directory: {item}")
    if file_list is not None:
        if file_list == "-":
            lines = sys.stdin.read().splitlines()
        else:
            with open(file_list, encoding="utf-8") as handle:
                lines = handle.read().splitlines()
        for line in lines:
            path = line.strip()
            if not path:
                continue
            if not os.path.isfile(path):
                raise CorpusError(f"no such file: {path}")
            pairs.append((path, path))
    if not pairs:
        raise CorpusError("no input files")
    return pairs


def _read_text(path: str) -> str:
    try:
        with open(path, "rb") as handle:
            return handle.read().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path} is not valid UTF-8: {exc}") from exc


def _read_files(pairs: list[tuple[str, str]]) -> list[tuple[str, str]]:
    return [(name, _read_text(path)) for name, path in pairs]


def _read_gz_files(pairs: list[tuple[str, str]]) -> list[tuple[str, str]]:
    files = []
    for name, path in pairs:
        with open(path, "rb") as handle:
            raw = gzip_mod.decompress(handle.read())
        display = name[:-3] if name.endswith(".gz") else name
        files.append((display, raw.decode("utf-8")))
    return files


# -- serialization -----------------------------------------------------------------


def serialize_tsv(task: str, result, names: list[str]):
    if task in ("word_count",):
        for word, count in result.items():
            yield f"{word}\t{count}"
    elif task == "sort":
        for word, count in result:
            yield f"{word}\t{count}"
    elif task == "inverted_index":
        for word, ids in result.items():
            yield f"{word}\t" + ",".join(names[i] for i in ids)
    elif task == "term_vector":
        for file_id, ranked in enumerate(result):
            for word, count in ranked:
                yield f"{names[file_id]}\t{word}\t{count}"
    elif task == "sequence_count":
        for file_id, table in enumerate(result):
            for gram, count in table.items():
                yield f"{names[file_id]}\t{gram}\t{count}"
    elif task == "ranked_inverted_index":
        for gram, ranked in result.items():
            for file_id, count in ranked:
                yield f"{gram}\t{names[file_id]}\t{count}"
    elif task == "tfidf":
        for word, scores in result.items():
            for file_id, score in scores.items():
                yield f"{word}\t{names[file_id]}\t{score!r}"
    else:
        raise ValueError(f"unknown task {task!r}")


def serialize_json(task: str, result, names: list[str]) -> str:
    if task in ("word_count",):
        body = list(result.items())
    elif task == "sort":
        body = [list(item) for item in result]
    elif task == "inverted_index":
        body = [[word, ids] for word, ids in result.items()]
    elif task == "term_vector":
        body = [[list(item) for item in ranked] for ranked in result]
    elif task == "sequence_count":
        body = result
    elif task == "ranked_inverted_index":
        body = [[gram, [list(item) for item in ranked]] for gram, ranked in result.items()]
    elif task == "tfidf":
        body = [[word, [[f, s] for f, s in scores.items()]] for word, scores in result.items()]
    else:
        raise ValueError(f"unknown task {task!r}")
    return json.dumps(
        {"schema_version": 1, "task": task, "files": names, "result": body},
        ensure_ascii=False,
    )


def _emit(task, result, names, output):
    if output == "json":
        print(serialize_json(task, result, names))
    else:
        for line in serialize_tsv(task, result, names):
            print(line)


# -- kernel dispatch -----------------------------------------------------------------


def _run_kernel(task, dag, dictionary, variant, l, top_k):
    if task == "word_count":
        if variant == "postorder":
            return kernels.word_count_postorder(dag, dictionary)
        return kernels.word_count_preorder(dag, dictionary)
    if task == "sort":
        return kernels.sort_words(dag, dictionary)
    if task == "inverted_index":
        return kernels.inverted_index(dag, dictionary, variant)
    if task == "term_vector":
        return kernels.term_vector(dag, dictionary, top_k)
    if task == "sequence_count":
        return kernels.sequence_count(dag, dictionary, l)
    if task == "ranked_inverted_index":
        return kernels.ranked_inverted_index(dag, dictionary, l)
    if task == "tfidf":
        return kernels.tfidf(dag, dictionary, variant)
    raise ValueError(f"unknown task {task!r}")


def _run_oracle(task, files, l, top_k, lowercase):
    lists = oracle.token_lists(files, lowercase)
    return _oracle_compute(task, lists, l, top_k)


def _oracle_compute(task, lists, l, top_k):
    if task == "word_count":
        return oracle.word_count_tokens(lists)
    if task == "sort":
        return oracle.sort_words_tokens(lists)
    if task == "inverted_index":
        return oracle.inverted_index_tokens(lists)
    if task == "term_vector":
        return oracle.term_vector_tokens(lists, top_k)
    if task == "sequence_count":
        return oracle.sequence_count_tokens(lists, l)
    if task == "ranked_inverted_index":
        return oracle.ranked_inverted_index_tokens(lists, l)
    if task == "tfidf":
        return oracle.tfidf_tokens(lists)
    raise ValueError(f"unknown task {task!r}")


def _resolve_variant(requested, header, task):
    if requested != "auto":
        return VARIANT_NAMES[requested]
    features = extract_features(None, header)
    variant = select_variant(features, task)
    _log(
        f"variant auto: {variant} (avg_file_tokens="
        f"{features.avg_file_tokens:.1f}, files={features.file_count})"
    )
    return variant


# -- commands --------------------------------------------------------------------


def cmd_compress(args) -> int:
    pairs = _collect_paths(args.inputs, args.file_list)
    files = _read_files(pairs)
    dictionary, encoded = encode_corpus(files, args.lowercase)
    grammar = infer_grammar(encoded.symbols, dictionary.n_total, dictionary.word_count)
    blob = write_container(
        dictionary, grammar, encoded.file_table, deflate=not args.no_deflate
    )
    with open(args.out, "wb") as handle:
        handle.write(blob)
    if args.dump_dict:
        with open(args.dump_dict, "w", encoding="utf-8") as handle:
            for line in dictionary.dump_lines():
                handle.write(line + "\n")
    _log(
        f"compressed {len(files)} files, {encoded.total_tokens} tokens, "
        f"vocabulary {dictionary.word_count}, {len(grammar.rules)} rules "
        f"-> {args.out} ({len(blob)} bytes)"
    )
    return 0


def cmd_decompress(args) -> int:
    with open(args.container, "rb") as handle:
        dictionary, grammar, header = read_container(handle.read())
    symbols = expand(grammar)
    decoded = decode_stream(symbols, dictionary)
    os.makedirs(args.out, exist_ok=True)
    for (index, tokens), entry in zip(decoded, header.file_table):
        name = entry.name
        if os.path.isabs(name) or ".." in name.split(os.sep):
            raise ContainerError(f"unsafe file name in container: {name!r}")
        path = os.path.join(args.out, name)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(" ".join(tokens))
            if tokens:
                handle.write("\n")
    _log(f"decompressed {len(decoded)} files into {args.out}")
    return 0


def cmd_analyze(args) -> int:
    task = TASK_NAMES[args.task]
    if args.engine in ("baseline", "gzip"):
        pairs = _collect_paths(args.inputs, None)
        files = _read_gz_files(pairs) if args.engine == "gzip" else _read_files(pairs)
        result = _run_oracle(task, files, args.l, args.top_k, args.lowercase)
        _emit(task, result, [name for name, _ in files], args.output)
        return 0

    if len(args.inputs) != 1:
        raise CorpusError("engine cd expects exactly one container file")
    with open(args.inputs[0], "rb") as handle:
        data = handle.read()
    dictionary, grammar, header = read_container(data)
    names = [entry.name for entry in header.file_table]
    variant = _resolve_variant(args.variant, header, task)
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("TADOC_WORKERS", "1"))
    if workers > 1:
        streams: list[list[int]] = []
        current: list[int] = []
        for sym in expand(grammar):
            if dictionary.is_separator(sym):
                streams.append(current)
                current = []
            else:
                current.append(sym)
        result = run_parallel(
            dictionary,
            streams,
            task,
            workers,
            variant=variant,
            l=args.l,
            top_k=args.top_k,
            coarsen_threshold=args.coarsen,
        )
    else:
        dag = load_merge_graph(grammar)
        threshold = args.coarsen
        if threshold is None:
            threshold = 100 if task in ORDER_SENSITIVE else 0
        if threshold:
            dag = coarsen(dag, threshold)
        result = _run_kernel(task, dag, dictionary, variant, args.l, args.top_k)
    _emit(task, result, names, args.output)
    return 0


def cmd_features(args) -> int:
    with open(args.container, "rb") as handle:
        header = read_header(handle.read())
    features = extract_features(None, header)
    rows = [
        ("files", features.file_count),
        ("tokens", features.total_tokens),
        ("avg_file_tokens", round(features.avg_file_tokens, 3)),
        ("vocabulary", features.vocab_size),
        ("rules", features.rule_count),
        ("container_bytes", features.container_size),
        ("outer_layer", "deflate" if header.deflate else "none"),
    ]
    if args.output == "json":
        print(json.dumps({"schema_version": 1, **dict(rows)}, ensure_ascii=False))
    else:
        for key, value in rows:
            print(f"{key}\t{value}")
    return 0


# -- bench -----------------------------------------------------------------------


def _timed(fn):
    start = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - start


def _bench_cd(task, container_path, variant, l, top_k, coarsen_threshold):
    (data, io_s) = _timed(lambda: open(container_path, "rb").read())

    def init():
        dictionary, grammar, header = read_container(data)
        dag = load_merge_graph(grammar)
        threshold = coarsen_threshold
        if threshold is None:
            threshold = 100 if task in ORDER_SENSITIVE else 0
        if threshold:
            dag = coarsen(dag, threshold)
        chosen = variant
        if chosen == "auto":
            chosen = select_variant(extract_features(None, header), task)
        return dictionary, dag, chosen

    (dictionary, dag, chosen), init_s = _timed(init)
    _, compute_s = _timed(lambda: _run_kernel(task, dag, dictionary, chosen, l, top_k))
    return {"io": io_s, "init": init_s, "compute": compute_s}


def _bench_raw(task, pairs, l, top_k, gz: bool):
    def read_bytes():
        return [(name, open(path, "rb").read()) for name, path in pairs]

    blobs, io_s = _timed(read_bytes)

    def init():
        lists = []
        for _, blob in blobs:
            raw = gzip_mod.decompress(blob) if gz else blob
            lists.append(tokenize(raw.decode("utf-8")))
        return lists

    lists, init_s = _timed(init)
    _, compute_s = _timed(lambda: _oracle_compute(task, lists, l, top_k))
    return {"io": io_s, "init": init_s, "compute": compute_s}


def cmd_bench(args) -> int:
    task = TASK_NAMES[args.task]
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    for engine in engines:
        if engine not in ("cd", "baseline", "gzip"):
            raise CorpusError(f"unknown engine {engine!r}")
    pairs = _collect_paths([args.corpus], None)
    files = _read_files(pairs)
    raw_size = sum(os.path.getsize(path) for _, path in pairs)

    workdir = args.workdir or tempfile.mkdtemp(prefix="tadoc-bench-")
    os.makedirs(workdir, exist_ok=True)

    start = time.perf_counter()
    dictionary, encoded = encode_corpus(files)
    grammar = infer_grammar(encoded.symbols, dictionary.n_total, dictionary.word_count)
    blob = write_container(dictionary, grammar, encoded.file_table, deflate=True)
    container_path = os.path.join(workdir, "corpus.tdoc")
    with open(container_path, "wb") as handle:
        handle.write(blob)
    compress_seconds = time.perf_counter() - start
    plain_size = len(
        write_container(dictionary, grammar, encoded.file_table, deflate=False)
    )
    _log(f"prepared container: {len(blob)} bytes in {compress_seconds:.2f}s")

    gz_pairs = []
    gz_size = 0
    for index, (name, path) in enumerate(pairs):
        gz_path = os.path.join(workdir, f"file{index}.gz")
        with open(path, "rb") as src, open(gz_path, "wb") as dst:
            dst.write(gzip_mod.compress(src.read(), 6))
        gz_size += os.path.getsize(gz_path)
        gz_pairs.append((name + ".gz", gz_path))

    results = {}
    for engine in engines:
        runs = []
        for _ in range(args.repeat):
            if engine == "cd":
                runs.append(
                    _bench_cd(
                        task, container_path, args.variant, args.l, args.top_k,
                        args.coarsen,
                    )
                )
            elif engine == "baseline":
                runs.append(_bench_raw(task, pairs, args.l, args.top_k, gz=False))
            else:
                runs.append(_bench_raw(task, gz_pairs, args.l, args.top_k, gz=True))
        medians = {
            phase: statistics.median(run[phase] for run in runs)
            for phase in ("io", "init", "compute")
        }
        medians["total"] = medians["io"] + medians["init"] + medians["compute"]
        results[engine] = {"runs": runs, **medians}
        _log(
            f"{engine}: io={medians['io']:.3f}s init={medians['init']:.3f}s "
            f"compute={medians['compute']:.3f}s total={medians['total']:.3f}s"
        )

    report = {
        "schema_version": 1,
        "task": task,
        "repeat": args.repeat,
        "corpus": {
            "files": len(files),
            "bytes": raw_size,
            "tokens": encoded.total_tokens,
        },
        "sizes": {
            "raw": raw_size,
            "container": len(blob),
            "container_no_deflate": plain_size,
            "deflate_of_raw": gz_size,
        },
        "ratios": {
            "raw": 1.0,
            "deflate_of_raw": raw_size / gz_size if gz_size else None,
            "container": raw_size / len(blob),
            "container_no_deflate": raw_size / plain_size,
        },
        "compress_seconds": compress_seconds,
        "engines": results,
    }
    if "baseline" in results:
        speedups = {}
        for engine in engines:
            if engine == "baseline":
                continue
            speedups[engine] = {
                phase: results["baseline"][phase] / results[engine][phase]
                if results[engine][phase] > 0
                else None
                for phase in ("io", "init", "compute", "total")
            }
        report["speedups_vs_baseline"] = speedups

    if args.output == "json":
        print(json.dumps(report, ensure_ascii=False))
    else:
        print("engine\tio_s\tinit_s\tcompute_s\ttotal_s")
        for engine in engines:
            r = results[engine]
            print(
                f"{engine}\t{r['io']:.4f}\t{r['init']:.4f}"
                f"\t{r['compute']:.4f}\t{r['total']:.4f}"
            )
        print(f"size_raw\t{raw_size}")
        print(f"size_container\t{len(blob)}")
        print(f"size_container_no_deflate\t{plain_size}")
        print(f"size_deflate_of_raw\t{gz_size}")
        print("ratio_raw\t1.000")
        if gz_size:
            print(f"ratio_deflate_of_raw\t{raw_size / gz_size:.3f}")
        print(f"ratio_container\t{raw_size / len(blob):.3f}")
        print(f"ratio_container_no_deflate\t{raw_size / plain_size:.3f}")
    return 0


# -- parser ----------------------------------------------------------------------


def _positive_length(value: str) -> int:
    length = int(value)
    if length < 2:
        raise argparse.ArgumentTypeError("sequence length must be >= 2")
    return length


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tadoc",
        description="Compress text corpora into grammar containers and run "
        "analytics directly on them.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="build a .tdoc container from text files")
    p.add_argument("inputs", nargs="*", help="input files or directories")
    p.add_argument("--file-list", help="manifest of input paths, or - for stdin")
    p.add_argument("--out", required=True, help="output container path")
    p.add_argument("--no-deflate", action="store_true", help="skip the outer layer")
    p.add_argument("--lowercase", action="store_true", help="NFC + lowercase input")
    p.add_argument("--dump-dict", help="also write code<TAB>word lines here")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct token streams from a container")
    p.add_argument("container")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("analyze", help="run an analytics task")
    p.add_argument("inputs", nargs="+", help="container (engine cd) or raw inputs")
    p.add_argument("task", choices=sorted(TASK_NAMES))
    p.add_argument(
        "--engine", choices=("cd", "baseline", "gzip"), default="cd",
        help="cd runs on the container; baseline/gzip run on raw/.gz text",
    )
    p.add_argument(
        "--variant", default="auto", choices=["auto", *sorted(VARIANT_NAMES)],
    )
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--l", type=_positive_length, default=3)
    p.add_argument("--coarsen", type=int, default=None, help="node coarsening threshold")
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--output", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("features", help="print corpus features from a container")
    p.add_argument("container")
    p.add_argument("--output", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("bench", help="time engines on a corpus directory")
    p.add_argument("corpus", help="directory of text files")
    p.add_argument("task", choices=sorted(TASK_NAMES))
    p.add_argument("--engines", default="cd,baseline,gzip")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--variant", default="auto", choices=["auto", *sorted(VARIANT_NAMES)])
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--l", type=_positive_length, default=3)
    p.add_argument("--coarsen", type=int, default=None)
    p.add_argument("--workdir", help="artifact directory (default: a temp dir)")
    p.add_argument("--output", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ContainerError as exc:
        _log(f"error: {exc}")
        return 3
    except CorpusError as exc:
        _log(f"error: {exc}")
        return 4
    except OSError as exc:
        _log(f"error: {exc}")
        return 4


if __name__ == "__main__":
    sys.exit(main())
