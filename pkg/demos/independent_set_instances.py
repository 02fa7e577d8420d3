"""
Instances built from graphs
===========================

A connected graph on Kq vertices, padded with isolated users, becomes a power
control instance whose best SLqP rate counts the graph's largest independent
set. Small cases can be checked exhaustively.
"""

import math

import numpy as np

from slqp import ComponentGraph, brute_force_binary_optimum, build_instance, run_qft
from slqp.hardness import max_independent_set, write_graph

graph = ComponentGraph.cycle(K=8, Kq=5, L=6.0)
print(write_graph(graph))

inst = build_instance(graph)
p, value = brute_force_binary_optimum(inst, graph.Kq)
mis = max_independent_set(graph)
print("best on/off powers:", p.astype(int))
print("maximum independent set:", mis)
print(f"brute force {value:.6f}  vs  |I| ln(1 + 1/L) = {len(mis) * math.log1p(1 / graph.L):.6f}")

# MM runs from random starts stay below the exact optimum.
vals = [run_qft(inst, graph.Kq, seed=s)[0].value for s in range(5)]
print("QFT from 5 starts:", np.round(vals, 6))
