"""Command-line front end: fit, tag, stats, synth, inspect.

Every output file is written atomically (serialize to memory, write a
temporary sibling, rename over the target), so a failing command never
leaves a partial artifact. All commands are idempotent: identical inputs
produce byte-identical outputs, float text included.

Exit codes: 0 success; 2 usage errors and invalid configurations; 1 runtime
failures (unreadable files, corrupt models, dimension mismatches).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, ProsotagError
from .gaussian import ProsodySample, load_samples, save_samples
from .gmm import assign_component
from .phonetics import (
    WordEntry,
    default_classes,
    describe_question,
    load_classes,
    load_lexicon,
    load_questions,
    question_index,
    save_classes,
    save_lexicon,
    save_questions,
)
from .synth import SynthSpec, generate, save_ground_truth, write_growth_csv
from .tagger import (
    TaggerConfig,
    TaggerModel,
    fit,
    load_model,
    model_to_json,
    tag_inventory,
)
from .tree import InternalNode, route_word

PROG = "prosotag"


def _atomic_write(path: str | Path, data: bytes) -> None:
    """Write via temp file + rename so failures leave no partial output."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _tag_lines(
    model: TaggerModel, lexicon: Sequence[WordEntry], samples: Iterable[ProsodySample]
) -> bytes:
    words = {e.word: e for e in lexicon}
    qindex = question_index(model.questions)
    letter_of: dict[str, str] = {}
    lines: list[str] = []
    for sample in samples:
        letter = letter_of.get(sample.word)
        if letter is None:
            entry = words.get(sample.word)
            if entry is None:
                raise ProsotagError(
                    f"word {sample.word!r} is not in the lexicon; routing needs phonetic content"
                )
            letter = route_word(model.tree, entry, qindex, model.classes)
            letter_of[sample.word] = letter
        component = assign_component(sample.embedding, model.gmms[letter])
        lines.append(
            json.dumps(
                {"token_id": sample.token_id, "word": sample.word, "tag": f"{letter}{component}"}
            )
        )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def _check_dimension(model: TaggerModel, samples: Sequence[ProsodySample]) -> None:
    if samples and samples[0].embedding.shape[0] != model.config.d:
        raise ProsotagError(
            f"embedding file dimension {samples[0].embedding.shape[0]} does not "
            f"match model dimension {model.config.d}"
        )


def cmd_fit(args: argparse.Namespace) -> int:
    classes = load_classes(args.classes)
    questions = load_questions(args.questions, classes)
    lexicon = load_lexicon(args.lexicon)
    samples = load_samples(args.embeddings)
    config = TaggerConfig(
        m=args.components,
        max_leaves=args.max_leaves,
        min_gain=args.min_gain,
        min_leaf=args.min_leaf,
        floor=args.var_floor,
        seed=args.seed,
    )
    model = fit(lexicon, samples, questions, classes, config)
    _atomic_write(args.model, model_to_json(model).encode("utf-8"))
    trace_path = args.trace_csv or f"{args.model}.trace.csv"
    buf = io.StringIO()
    write_growth_csv(model.growth_trace, buf)
    _atomic_write(trace_path, buf.getvalue().encode("utf-8"))
    if args.out:
        _atomic_write(args.out, _tag_lines(model, lexicon, samples))
    total_ll = (
        model.growth_trace.records[-1].total_leaf_ll
        if model.growth_trace.records
        else model.growth_trace.initial_ll
    )
    print(
        f"fit: {model.num_leaves} leaves, {model.num_tags} tags, "
        f"final total leaf log-likelihood {total_ll:.6f}"
    )
    return 0


def cmd_tag(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    lexicon = load_lexicon(args.lexicon)
    samples = load_samples(args.embeddings)
    _check_dimension(model, samples)
    _atomic_write(args.out, _tag_lines(model, lexicon, samples))
    print(f"tag: wrote {len(samples)} tags to {args.out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    buf = io.StringIO()
    write_growth_csv(model.growth_trace, buf)
    csv_text = buf.getvalue()
    sys.stdout.write(csv_text)
    print()
    for letter in model.tree.leaf_letters:
        gmm = model.gmms[letter]
        weights = ", ".join(f"{w:.4f}" for w in gmm.weights)
        print(f"leaf {letter}: {gmm.n_samples} samples, {gmm.m} components, weights [{weights}]")
    if args.out:
        _atomic_write(args.out, csv_text.encode("utf-8"))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        num_leaf_archetypes=args.archetypes,
        words_per_archetype=args.words_per_archetype,
        tokens_per_word=args.tokens_per_word,
        components_per_archetype=args.components,
        d=args.d,
        component_separation=args.separation,
        seed=args.seed,
        class_distinctions=args.class_distinctions,
    )
    classes = default_classes()
    lexicon, questions, samples, truth = generate(spec, classes)

    sink = io.BytesIO()
    save_lexicon(lexicon, sink)
    _atomic_write(args.lexicon, sink.getvalue())
    sink = io.BytesIO()
    save_questions(questions, sink)
    _atomic_write(args.questions, sink.getvalue())
    sink = io.BytesIO()
    save_classes(classes, sink)
    _atomic_write(args.classes, sink.getvalue())
    sink = io.BytesIO()
    save_samples(samples, sink, binary=args.binary)
    _atomic_write(args.embeddings, sink.getvalue())
    sink = io.BytesIO()
    save_ground_truth(truth, sink)
    _atomic_write(args.ground_truth, sink.getvalue())
    print(
        f"synth: {len(lexicon)} words, {len(samples)} tokens, "
        f"{len(questions)} questions (seed {spec.seed})"
    )
    return 0


def _render_node(
    model: TaggerModel, pos: int, label: str, depth: int, out: list[str]
) -> None:
    node = model.tree.nodes[pos]
    pad = "  " * depth
    if isinstance(node, InternalNode):
        question = question_index(model.questions)[node.question_id]
        out.append(f"{pad}{label}[node {pos}] Q{question.id}: {describe_question(question)}")
        _render_node(model, node.yes_child, "yes -> ", depth + 1, out)
        _render_node(model, node.no_child, "no  -> ", depth + 1, out)
    else:
        letter = model.tree.leaf_letters[node.leaf_index]
        gmm = model.gmms[letter]
        weights = ", ".join(f"{w:.4f}" for w in gmm.weights)
        out.append(
            f"{pad}{label}[node {pos}] leaf {letter!r}: {gmm.n_samples} samples, "
            f"{gmm.m} components, weights [{weights}]"
        )


def cmd_inspect(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    cfg = model.config
    print(
        f"model: d={cfg.d}, {model.num_leaves} leaves, {model.num_tags} tags, "
        f"seed={cfg.seed}, floor={cfg.floor}"
    )
    lines: list[str] = []
    _render_node(model, 0, "", 0, lines)
    for line in lines:
        print(line)
    inventory = " ".join(str(t) for t in tag_inventory(model))
    print(f"tag inventory: {inventory}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Unsupervised two-stage word prosody tagger: "
        "a phonetic-question decision tree, then per-leaf Gaussian mixtures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a tagger on a token corpus")
    p_fit.add_argument("--lexicon", required=True, help="lexicon JSON lines")
    p_fit.add_argument("--embeddings", required=True, help="embedding file (JSON lines or binary)")
    p_fit.add_argument("--questions", required=True, help="question set JSON lines")
    p_fit.add_argument("--classes", required=True, help="phoneme class table JSON")
    p_fit.add_argument("--model", required=True, help="output model JSON path")
    p_fit.add_argument("--out", help="optional output path for the training set's tags")
    p_fit.add_argument("--trace-csv", help="growth trace CSV path (default: <model>.trace.csv)")
    p_fit.add_argument("--max-leaves", type=int, default=10)
    p_fit.add_argument("--components", type=int, default=5)
    p_fit.add_argument("--min-gain", type=float, default=0.0)
    p_fit.add_argument("--min-leaf", type=int, default=10)
    p_fit.add_argument("--var-floor", type=float, default=1e-6)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.set_defaults(handler=cmd_fit)

    p_tag = sub.add_parser("tag", help="tag tokens with a fitted model")
    p_tag.add_argument("--model", required=True)
    p_tag.add_argument("--lexicon", required=True)
    p_tag.add_argument("--embeddings", required=True)
    p_tag.add_argument("--out", required=True, help="output tag JSON lines")
    p_tag.set_defaults(handler=cmd_tag)

    p_stats = sub.add_parser("stats", help="report growth curve and per-leaf mixtures")
    p_stats.add_argument("--model", required=True)
    p_stats.add_argument("--out", help="optional growth curve CSV path")
    p_stats.set_defaults(handler=cmd_stats)

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus with planted structure")
    p_synth.add_argument("--lexicon", required=True, help="output lexicon path")
    p_synth.add_argument("--questions", required=True, help="output question set path")
    p_synth.add_argument("--classes", required=True, help="output class table path")
    p_synth.add_argument("--embeddings", required=True, help="output embedding path")
    p_synth.add_argument("--ground-truth", required=True, help="output planted-label path")
    p_synth.add_argument("--archetypes", type=int, default=10)
    p_synth.add_argument("--words-per-archetype", type=int, default=50)
    p_synth.add_argument("--tokens-per-word", type=int, default=10)
    p_synth.add_argument("--components", type=int, default=5)
    p_synth.add_argument("--d", type=int, default=16)
    p_synth.add_argument("--separation", type=float, default=8.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument(
        "--class-distinctions",
        action="store_true",
        help="make odd archetypes vowel-initial and add a class question",
    )
    p_synth.add_argument(
        "--binary", action="store_true", help="write embeddings in the binary format"
    )
    p_synth.set_defaults(handler=cmd_synth)

    p_inspect = sub.add_parser("inspect", help="pretty-print a fitted model")
    p_inspect.add_argument("--model", required=True)
    p_inspect.set_defaults(handler=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"{PROG}: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except ProsotagError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
