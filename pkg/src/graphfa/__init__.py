"""graphfa: regular expressions over typed graph symbols, compiled into
checked deterministic automata that recognize hypergraphs in linear time.

Typical flow: parse or build a regex / automaton, `compile_regex_text` or
`compile_automaton` it into a certified Dfa, then `recognize` graphs against
it.  `recognize_backtracking` is the slow semantic reference; `langs` holds
ready-made example languages with generators; `bench` times the engines.
"""

from .analysis import (FecReport, TsReport, fec_check, reorder_transitions,
                       strayable, ts_check)
from .automaton import Dfa, Transition, TypedAutomaton
from .bench import BenchConfig, BenchEvent, SizeResult, run_bench, write_csv
from .engine import GraphArrays
from .errors import (BudgetExhausted, ChecksumMismatch, GraphfaError,
                     InternalError, InvariantViolation, ParseError,
                     SemanticError, TypeMismatch, UncertifiedDfa,
                     VersionMismatch)
from .formats import (export_dot, parse_automaton_spec, parse_graph,
                      parse_symbol, read_dfa, write_automaton_spec, write_dfa,
                      write_graph)
from .langs import (LANGUAGES, compiled_dfa, gen_abc, gen_palindrome,
                    gen_spikes, gen_wheel, generate, mutate, nfa,
                    sample_members, shuffle_edges)
from .model import (AtomSymbol, BlankSymbol, Edge, Graph, concat, graph,
                    interpret, interpret_string, iso_check, make_atom,
                    make_blank, word_type)
from .pipeline import (CompileResult, compile_automaton, compile_regex_text,
                       determinize, minimize, powerset)
from .recognizer import (Outcome, Witness, WitnessStep, apply_symbol,
                         recognize, recognize_backtracking, recognize_linear)
from .regex import load_regex, parse_regex, regex_to_nfa

__version__ = "0.1.0"

__all__ = [
    "AtomSymbol", "BenchConfig", "BenchEvent", "BlankSymbol", "BudgetExhausted",
    "ChecksumMismatch", "CompileResult", "Dfa", "Edge", "FecReport", "Graph",
    "GraphArrays", "GraphfaError", "InternalError", "InvariantViolation",
    "LANGUAGES", "Outcome", "ParseError", "SemanticError", "SizeResult",
    "Transition", "TsReport", "TypeMismatch", "TypedAutomaton",
    "UncertifiedDfa", "VersionMismatch", "Witness", "WitnessStep",
    "apply_symbol", "compile_automaton", "compile_regex_text", "compiled_dfa",
    "concat", "determinize", "export_dot", "fec_check", "gen_abc",
    "gen_palindrome", "gen_spikes", "gen_wheel", "generate", "graph",
    "interpret", "interpret_string", "iso_check", "load_regex", "make_atom",
    "make_blank", "minimize", "mutate", "nfa", "parse_automaton_spec",
    "parse_graph", "parse_regex", "parse_symbol", "powerset", "read_dfa",
    "recognize", "recognize_backtracking", "recognize_linear",
    "reorder_transitions", "run_bench", "sample_members", "shuffle_edges",
    "strayable", "ts_check", "word_type", "write_automaton_spec", "write_csv",
    "write_dfa", "write_graph", "__version__",
]
