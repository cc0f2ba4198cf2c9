"""Command-line entry point: ``formlang <noun> <verb> [options]``.

Exit codes: 0 on success, 1 on domain errors (one-line diagnostic on
stderr), 2 on malformed invocations.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import corpus, hankel, lstar, memory_automata, regular, rfa, saturation, wfa
from .core import Alphabet, format_fraction, format_tokens, parse_tokens, read_valued_pairs, write_dataset
from .errors import FormatError, FormlangError


def _dump(data, out: Optional[str]):
    text = json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}")


def _emit_machine(machine, args):
    if getattr(args, "dot", False):
        sys.stdout.write(regular.to_dot(machine))
        return
    _dump(regular.automaton_to_json(machine), args.out)


def _as_dfa(machine) -> regular.Dfa:
    return regular.determinize(machine) if isinstance(machine, regular.Nfa) else machine


def _parse_n_values(text: str) -> List[int]:
    """``1..12`` or ``1,2,8``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad length list {text!r}")


# -- regex ------------------------------------------------------------------------------------


def cmd_regex_compile(args):
    alphabet = Alphabet.of(args.alphabet)
    ast = regular.parse_regex(args.regex, alphabet)
    nfa = regular.thompson(ast, alphabet)
    machine = nfa if args.nfa else regular.determinize(nfa)
    if args.minimize:
        machine = regular.minimize(machine)
    _emit_machine(machine, args)


def cmd_regex_min(args):
    _emit_machine(regular.minimize(_as_dfa(regular.load_automaton(args.automaton))), args)


def cmd_regex_equiv(args):
    a = _as_dfa(regular.load_automaton(args.a))
    b = _as_dfa(regular.load_automaton(args.b))
    cex = regular.counterexample(a, b)
    if cex is None:
        print("equal")
    else:
        print(f"counterexample {format_tokens(cex, '%e')}")


def cmd_regex_to_regex(args):
    print(regular.regex_to_text(regular.to_regex(_as_dfa(regular.load_automaton(args.automaton)))))


def cmd_automaton_run(args):
    machine = regular.load_automaton(args.automaton)
    string = parse_tokens(args.input, machine.alphabet)
    print("accept" if regular.accepts(machine, string) else "reject")


# -- D-automata -----------------------------------------------------------------------------


def cmd_dautomaton_run(args):
    m = memory_automata.load_dautomaton(args.machine)
    string = parse_tokens(args.input, m.alphabet)
    if isinstance(m, memory_automata.NondetDAutomaton):
        accepted = memory_automata.run_nondeterministic(m, string, args.frontier_cap)
    else:
        run = memory_automata.run_deterministic(m, string)
        accepted = run.accepted
        if args.trace:
            s = m.structure
            for step in run.trace:
                print(json.dumps({"config": list(step.config), "state": step.state,
                                  "read": s.readout_to_json(step.readout)}, ensure_ascii=False))
    print("accept" if accepted else "reject")


def cmd_dautomaton_builtin(args):
    name = args.name
    if name == "dyck-stack":
        m = memory_automata.builtin_dyck_stack(args.k, args.window)
    else:
        m = memory_automata.BUILTINS[name]()
    _dump(memory_automata.dautomaton_to_json(m), args.out)


# -- corpus ------------------------------------------------------------------------------------


def cmd_corpus_gen(args, parser):
    alphabet = Alphabet.of(args.alphabet) if args.alphabet else None
    spec = corpus.parse_language(args.language, alphabet)
    if args.count is None:
        dataset = corpus.enumerate_labeled(spec, args.max_len)
    else:
        if args.seed is None:
            parser.error("sampling with --count requires --seed")
        dataset = corpus.sample_labeled(spec, args.count, args.max_len, args.positive_fraction, args.seed)
    if args.out:
        write_dataset(dataset, args.out)
    else:
        write_dataset(dataset, sys.stdout)


# -- WFA -------------------------------------------------------------------------------------------


def cmd_wfa_score(args):
    w = wfa.load_wfa(args.wfa)
    string = parse_tokens(args.input, w.alphabet)
    value = wfa.score_bruteforce(w, string) if args.bruteforce else wfa.score(w, string)
    print(wfa.format_weight(value))


def cmd_wfa_builtin(args):
    if args.name == "binary":
        w = wfa.builtin_binary_value(args.base)
    else:
        if not args.pattern:
            raise FormatError("ngram needs --pattern")
        alphabet = Alphabet.of(args.alphabet) if args.alphabet else None
        w = wfa.builtin_ngram_counter(tuple(args.pattern.split()) if " " in args.pattern
                                      else tuple(args.pattern), alphabet)
    _dump(wfa.wfa_to_json(w), args.out)


# -- Hankel and learning ----------------------------------------------------------------------------


def _block_from_args(args) -> hankel.HankelBlock:
    if getattr(args, "block", None):
        return hankel.load_block(args.block)
    if args.wfa:
        f = hankel.BlackboxFn.from_wfa(wfa.load_wfa(args.wfa))
    elif args.values:
        if not args.alphabet:
            raise FormatError("--values needs --alphabet")
        f = hankel.BlackboxFn.from_values(read_valued_pairs(args.values), Alphabet.of(args.alphabet),
                                          args.default_zero)
    else:
        raise FormatError("give one of --block, --wfa or --values")
    return hankel.build_block(f, args.prefix_len, args.suffix_len, with_shifts=True)


def _add_block_source(p, with_block=True):
    src = p.add_mutually_exclusive_group(required=True)
    if with_block:
        src.add_argument("--block", help="Hankel block JSON")
    src.add_argument("--wfa", help="WFA JSON used as a black box")
    src.add_argument("--values", help="file of '<value>\\t<tokens>' lines")
    p.add_argument("--alphabet", help="alphabet for --values")
    p.add_argument("--default-zero", action="store_true", help="missing strings score 0")
    p.add_argument("--prefix-len", type=int, default=3)
    p.add_argument("--suffix-len", type=int, default=3)


def cmd_hankel_build(args):
    _dump(hankel.block_to_json(_block_from_args(args)), args.out)


def cmd_hankel_rank(args):
    print(hankel.exact_rank(_block_from_args(args)))


def cmd_learn_spectral(args):
    block = _block_from_args(args)
    _dump(wfa.wfa_to_json(hankel.spectral_learn(block, args.rank, args.mode)), args.out)


def cmd_learn_lstar(args):
    target = regular.minimize(_as_dfa(regular.load_automaton(args.target)))
    teacher = lstar.make_teacher_from_dfa(target)
    result = lstar.lstar_learn(teacher, target.alphabet, args.max_equivalence_queries)
    _dump(regular.automaton_to_json(result.dfa), args.out)
    report = f"membership={result.membership_queries}, equivalence={result.equivalence_queries}"
    print(report, file=sys.stdout if args.out else sys.stderr)


# -- saturation ----------------------------------------------------------------------------------------


def _load_cell(text: str) -> saturation.CellSpec:
    if text.startswith("builtin:"):
        name = text[len("builtin:"):]
        if name not in saturation.BUILTIN_CELLS:
            raise FormatError(f"unknown builtin cell {name!r}; choose from {sorted(saturation.BUILTIN_CELLS)}")
        return saturation.BUILTIN_CELLS[name]()
    return saturation.load_cell(text)


def cmd_saturate_step(args):
    cell = _load_cell(args.cell)
    if args.state is None:
        state = cell.initial_state()
    else:
        try:
            state = saturation.state_from_json(cell, json.loads(args.state))
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad --state: {exc}")
    print(json.dumps(saturation.state_to_json(saturation.saturate_step(cell, state, args.input))))


def cmd_saturate_probe(args):
    cell = _load_cell(args.cell)
    for row in saturation.probe_cell(cell, args.n):
        print(f"{row.n}\t{row.count}\t{row.bits:.4f}")


def cmd_saturate_attention(args):
    if args.instance.lstrip().startswith("{"):
        try:
            data = json.loads(args.instance)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad --instance: {exc}")
    else:
        data = _read_json(args.instance)
    try:
        inst = saturation.AttentionInstance(data["query"], data["keys"], data["values"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormlangError):
            raise
        raise FormatError(f"malformed attention instance: {exc}")
    print(" ".join(format_fraction(v) for v in saturation.saturated_attention(inst)))


# -- RFA ---------------------------------------------------------------------------------------------------


def cmd_rfa_check(args):
    report = rfa.check(args.d, args.D, args.sigma, args.pairs, args.seed)
    print(f"mean={report.mean_error:.6g} max={report.max_error:.6g}")


# -- parser ----------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formlang", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    nouns = parser.add_subparsers(dest="noun", required=True)

    def group(name, help):
        p = nouns.add_parser(name, help=help, allow_abbrev=False)
        return p.add_subparsers(dest="verb", required=True)

    def verb(sub, name, func, help):
        p = sub.add_parser(name, help=help, allow_abbrev=False)
        p.set_defaults(func=func)
        return p

    def machine_out(p):
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--dot", action="store_true", help="print Graphviz DOT instead of JSON")

    rx = group("regex", "regular expressions and finite automata")
    p = verb(rx, "compile", cmd_regex_compile, "regex to automaton JSON")
    p.add_argument("--regex", required=True)
    p.add_argument("--alphabet", required=True, help="e.g. 'a,b' or 'ab'")
    p.add_argument("--nfa", action="store_true", help="emit the Thompson NFA")
    p.add_argument("--minimize", action="store_true")
    machine_out(p)
    p = verb(rx, "min", cmd_regex_min, "minimize an automaton")
    p.add_argument("--automaton", required=True)
    machine_out(p)
    p = verb(rx, "equiv", cmd_regex_equiv, "language equivalence with counterexample")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = verb(rx, "to-regex", cmd_regex_to_regex, "state elimination")
    p.add_argument("--automaton", required=True)

    au = group("automaton", "run finite automata")
    p = verb(au, "run", cmd_automaton_run, "accept or reject one input")
    p.add_argument("--automaton", required=True)
    p.add_argument("--input", required=True)

    da = group("dautomaton", "automata with a data structure")
    p = verb(da, "run", cmd_dautomaton_run, "accept or reject one input")
    p.add_argument("--machine", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--trace", action="store_true", help="print one JSON line per step")
    p.add_argument("--frontier-cap", type=int, default=10**6)
    p = verb(da, "builtin", cmd_dautomaton_builtin, "emit a builtin machine")
    p.add_argument("--name", required=True, choices=sorted(memory_automata.BUILTINS))
    p.add_argument("--k", type=int, default=1, help="bracket pairs (dyck-stack)")
    p.add_argument("--window", type=int, default=1, help="readout depth (dyck-stack)")
    p.add_argument("--out")

    co = group("corpus", "labeled string datasets")
    p = verb(co, "gen", None, "enumerate or sample a labeled dataset")
    p.add_argument("--language", required=True, help="dyck:K, anbn, anbncn, astar_b_astar or regex:EXPR")
    p.add_argument("--alphabet", help="alphabet for regex languages")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--count", type=int, help="sample this many strings (requires --seed)")
    p.add_argument("--positive-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=lambda args, parser=p: cmd_corpus_gen(args, parser))

    wf = group("wfa", "weighted finite automata")
    p = verb(wf, "score", cmd_wfa_score, "score one input")
    p.add_argument("--wfa", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--bruteforce", action="store_true", help="sum over explicit paths")
    p = verb(wf, "builtin", cmd_wfa_builtin, "emit a builtin WFA")
    p.add_argument("--name", required=True, choices=["binary", "ngram"])
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--pattern")
    p.add_argument("--alphabet")
    p.add_argument("--out")

    hk = group("hankel", "Hankel sub-blocks")
    p = verb(hk, "build", cmd_hankel_build, "build a block with symbol shifts")
    _add_block_source(p, with_block=False)
    p.add_argument("--out")
    p = verb(hk, "rank", cmd_hankel_rank, "exact rank of a block")
    _add_block_source(p)

    le = group("learn", "automata learning")
    p = verb(le, "lstar", cmd_learn_lstar, "L* against a DFA teacher")
    p.add_argument("--target", required=True)
    p.add_argument("--max-equivalence-queries", type=int, default=1000)
    p.add_argument("--out")
    p = verb(le, "spectral", cmd_learn_spectral, "spectral WFA learning")
    _add_block_source(p)
    p.add_argument("--rank", type=int, help="truncate to this rank")
    p.add_argument("--mode", choices=["rational", "float"], default="rational")
    p.add_argument("--out")

    sa = group("saturate", "saturated networks")
    cell_help = "cell JSON file or builtin:NAME"
    p = verb(sa, "step", cmd_saturate_step, "one saturated step")
    p.add_argument("--cell", required=True, help=cell_help)
    p.add_argument("--state", help="JSON state; defaults to the initial state")
    p.add_argument("--input", required=True)
    p = verb(sa, "probe", cmd_saturate_probe, "distinct reachable states per input length")
    p.add_argument("--cell", required=True, help=cell_help)
    p.add_argument("--n", type=_parse_n_values, default=list(range(1, 13)), help="e.g. 1..12")
    p = verb(sa, "attention", cmd_saturate_attention, "saturated attention on one instance")
    p.add_argument("--instance", required=True, help='inline JSON {"query":[...],"keys":[[...]],"values":[[...]]} or a file holding it')

    rf = group("rfa", "random Fourier features")
    p = verb(rf, "check", cmd_rfa_check, "kernel estimator error on random pairs")
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--D", type=int, default=2048)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except FormlangError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
