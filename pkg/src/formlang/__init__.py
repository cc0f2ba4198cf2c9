"""Formal-language workbench: finite automata, automata with memory, weighted
automata, Hankel-based and query-based learning, saturated networks and
random features."""

__version__ = "0.1.0"
