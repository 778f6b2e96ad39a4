"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``;
the lines are also repeated in the pytest terminal summary.
"""

import csv
import json
import math
import random
from pathlib import Path

import numpy as np
import pytest

from ghznet.analysis import ClusterAssignment, FeatureMatrix, label_clusters, standardize
from ghznet.cli import main
from ghznet.linkmodel import LinkModel, length_for_probability, link_success_probability, transmission_probability
from ghznet.montecarlo import SimulationConfig, derive_seed, run_simulation
from ghznet.protocols import precompute_route, run_protocol
from ghznet.report import sha256_file
from ghznet.routing import best_steiner, max_disjoint_paths
from ghznet.topology import from_edges, rescale, select_users, star_feasible
from ghznet.trimming import redundant_repeaters, run_trimming

from acceptance_log import record
from oracles import brute_disjoint, brute_steiner, expected_max_geometric_ie, random_topology, to_nx

M = LinkModel()


# 1 ---------------------------------------------------------------------------


def test_criterion_1_link_model():
    p100 = transmission_probability(M, 100)
    far = link_success_probability(M, 1396.65)
    rel = abs(far - 1.17e-28) / 1.17e-28
    ok = p100 == 0.01 and rel <= 0.01
    record(1, ok, f"p_tr(100 km)={p100!r}, p_e(1396.65 km)={far:.4g} (rel err {rel:.2%})")
    assert ok


# 2 ---------------------------------------------------------------------------


def random_route(i):
    """Random tree with 1-6 edges whose leaves are the users, so the fixed route is every edge."""
    rnd = random.Random(2000 + i)
    k = 1 + i % 6
    ps = [rnd.uniform(0.05, 0.9) for _ in range(k)]
    edges = [(f"n{j + 1}", f"n{rnd.randrange(j + 1)}", length_for_probability(M, p)) for j, p in enumerate(ps)]
    t = from_edges(f"route{i}", edges)
    degree = {v: 0 for v in t.node_ids}
    for u, v in t.lengths:
        degree[u] += 1
        degree[v] += 1
    return t, tuple(v for v, d in degree.items() if d == 1), ps


def test_criterion_2_sp_oracle():
    n_routes, hits = 24, 0
    for i in range(n_routes):
        t, users, ps = random_route(i)
        route = precompute_route("SPT", t, users)
        assert route.edges == set(t.lengths)
        s = run_simulation(t, users, "SPT", M, SimulationConfig(iterations=5000, master_seed=i))
        exact = expected_max_geometric_ie(ps)
        hits += abs(s.expected_timeslots - exact) <= 3 * s.std_error
    ok = hits / n_routes >= 0.95
    record(2, ok, f"{hits}/{n_routes} routes within 3 std-errors of the inclusion-exclusion oracle")
    assert ok


# 3 ---------------------------------------------------------------------------


def coupled_topologies(count=5):
    found, seed = [], 0
    while len(found) < count:
        n = 15 + (seed * 7) % 16
        t = rescale(random_topology(n, 1000 + seed, extra=0.15, name=f"c{seed}"))
        seed += 1
        users = select_users(t, 4)
        if star_feasible(t, users):
            found.append((t, users))
    return found


def test_criterion_3_coupled_dominance():
    relations = {
        "T(MPS)<=T(SPS)": ("MPS", "SPS"),
        "T(MPT)<=T(SPT)": ("MPT", "SPT"),
        "T(SPT)<=T(SPS)": ("SPT", "SPS"),
        "T(MPT)<=T(MPS)": ("MPT", "MPS"),
    }
    violations = dict.fromkeys(relations, 0)
    runs = 0
    for k, (t, users) in enumerate(coupled_topologies()):
        for i in range(200):
            seed = derive_seed(k, i)
            T = {p: run_protocol(p, t, users, M, seed).timeslots for p in ("SPS", "SPT", "MPS", "MPT")}
            runs += 1
            for name, (lo, hi) in relations.items():
                violations[name] += T[lo] > T[hi]
    ok = not any(violations.values())
    detail = ", ".join(f"{name} holds in {runs - v}/{runs}" for name, v in violations.items())
    record(3, ok, f"{runs} coupled runs on 5 topologies: {detail}")
    assert ok, violations


# 4 ---------------------------------------------------------------------------


def test_criterion_4_steiner_quality():
    bound_ok, optimal = 0, 0
    for i in range(200):
        t = random_topology(6 + i % 7, 4000 + i, extra=0.3)
        terms = tuple(random.Random(i).sample(t.node_ids, 3 + i % 2))
        opt = brute_steiner(to_nx(t), terms)
        got = best_steiner(t.adjacency, terms).total_length
        bound_ok += opt - 1e-9 <= got <= 2 * (1 - 1 / len(terms)) * opt + 1e-9
        optimal += math.isclose(got, opt, rel_tol=1e-9)
    ok = bound_ok == 200
    record(4, ok, f"bound held on {bound_ok}/200; optimal on {optimal}/200 ({optimal / 2:.0f}%, informational)")
    assert ok


# 5 ---------------------------------------------------------------------------


def verify_disjoint(adj, centre, users, paths):
    interiors = set()
    for path in paths:
        if path[-1] != centre or path[0] not in users:
            return False
        if any(b not in adj[a] for a, b in zip(path, path[1:])):
            return False
        inner = set(path[1:-1])
        if inner & interiors or inner & set(users) or centre in inner or len(inner) != len(path) - 2:
            return False
        interiors |= inner
    return len({p[0] for p in paths}) == len(paths)


def test_criterion_5_disjoint_paths():
    agree, verified = 0, 0
    for i in range(200):
        t = random_topology(6 + i % 7, 5000 + i, extra=0.25)
        rnd = random.Random(i)
        users = tuple(rnd.sample(t.node_ids, 4))
        centre = rnd.choice(t.node_ids)
        res = max_disjoint_paths(t.adjacency, centre, users)
        count, _ = brute_disjoint(to_nx(t), centre, users)
        agree += res.flow == count
        verified += verify_disjoint(t.adjacency, centre, users, res.paths)
    ok = agree == 200 and verified == 200
    record(5, ok, f"flow matched exhaustive search on {agree}/200; disjointness verified on {verified}/200")
    assert ok


# 6 ---------------------------------------------------------------------------


def trim_toy(i):
    t = random_topology(7 + i % 4, seed=300 + i, extra=0.25, lo=5, hi=30, name=f"toy{i}")
    return t, t.node_ids[: 3 + i % 2]


def ring_with_chords():
    return from_edges(
        "rwc",
        [
            ("a", "b", 20), ("b", "c", 20), ("c", "x", 20), ("x", "a", 20),
            ("a", "c", 30), ("b", "x", 30), ("e", "x", 15),
            ("a", "y", 10), ("y", "z", 10), ("z", "a", 10),
        ],
    )  # fmt: skip


def test_criterion_6_trimming():
    cfg = SimulationConfig(iterations=5000, master_seed=17)
    identical, monotone = 0, 0
    for i in range(10):
        t, users = trim_toy(i)
        base = run_simulation(t, users, "MPT", M, cfg)
        red = redundant_repeaters(base, users)
        again = run_simulation(t.without_nodes(red), users, "MPT", M, cfg)
        identical += again.samples == base.samples and again.solutions == base.solutions

        trace = run_trimming(t, users, "MPT", M, cfg)
        ok_steps = True
        for a, b in zip(trace.steps, trace.steps[1:]):
            # std-error of lambda from that of E[T] by the delta method
            se = math.hypot(a.std_error * a.rate**2, b.std_error * b.rate**2)
            ok_steps &= b.rate <= a.rate + 3 * se
        monotone += ok_steps

    rwc = run_trimming(ring_with_chords(), "abce", "MPT", M, cfg)
    single = len(rwc.steps) == 1 and rwc.steps[0].removed_nodes == {"y", "z"} and rwc.steps[0].usage["x"] == 1.0
    ok = identical == 10 and monotone == 10 and single
    record(
        6,
        ok,
        f"(a) bit-identical after redundant removal {identical}/10; (b) lambda non-increasing {monotone}/10; "
        f"(c) ring-with-chords maximally trimmed in one step: {single}",
    )
    assert ok


# 7 and 8 share one simulated corpus ------------------------------------------


def wheel(i):
    """Hub plus rim; the first ten have short links, the last ten long ones."""
    rnd = random.Random(i)
    lo, hi = (5, 15) if i < 10 else (40, 60)
    n = 6 + i % 4
    rim = [f"r{j}" for j in range(n)]
    edges = [("hub", r, rnd.uniform(lo, hi)) for r in rim]
    edges += [(rim[j], rim[(j + 1) % n], rnd.uniform(lo, hi)) for j in range(n)]
    users = tuple(rim[j] for j in (0, n // 4 + 1, n // 2 + 1, (3 * n) // 4 + 1))
    return from_edges(f"w{i:02d}", edges), users


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    summaries = root / "summaries"
    for i in range(20):
        t, users = wheel(i)
        path = root / f"{t.name}.json"
        path.write_text(json.dumps(t.to_dict()))
        args = ["simulate", "-t", str(path), "-p", "all", "-n", "500", "--seed", str(i)]
        args += ["--users", ",".join(users), "--rescale-max-km", "0", "--out", str(summaries)]
        assert main(args) == 0
    clusters = root / "clusters"
    assert main(["cluster", "--summaries", str(summaries), "--k", "2", "--out", str(clusters)]) == 0
    return root


def test_criterion_7_clustering(corpus):
    with open(corpus / "clusters" / "clusters.csv", newline="") as fh:
        labels = {r["topology"]: r["cluster"] for r in csv.DictReader(fh)}
    near = {labels[f"w{i:02d}"] for i in range(10)}
    far = {labels[f"w{i:02d}"] for i in range(10, 20)}
    recovered = len(near) == 1 and len(far) == 1 and near != far
    sil = json.loads((corpus / "clusters" / "diagnostics.json").read_text())["silhouette"]

    # hand-built cluster means with every column averaging 20
    raw = np.array([[10, 10, 10, 10], [30, 30, 30, 30], [30, 10, 30, 10], [10, 30, 10, 30]], dtype=float)
    f = FeatureMatrix(tuple("abcd"), raw, standardize(raw))
    a = ClusterAssignment(np.arange(4), np.zeros((4, 4)), 0.0)
    lab = label_clusters(a, f)
    expected = {
        0: ("globally favourable", ["good"] * 4),
        1: ("globally adverse", ["poor"] * 4),
        2: ("tree dominant", ["poor", "good", "poor", "good"]),
        3: ("mixed", ["good", "poor", "good", "poor"]),
    }
    flags_ok = all(
        lab[c]["class"] == cls and list(lab[c]["flags"].values()) == flags for c, (cls, flags) in expected.items()
    )
    ok = recovered and sil > 0.5 and flags_ok
    record(7, ok, f"regimes recovered: {recovered}; silhouette {sil:.3f}; good/poor flags reproduced: {flags_ok}")
    assert ok


def test_criterion_8_corpus_ordering(corpus):
    with open(corpus / "clusters" / "protocol_means.csv", newline="") as fh:
        means = {r["protocol"]: float(r["mean_expected_timeslots"]) for r in csv.DictReader(fh)}
    ok = means["MPT"] <= means["MPS"] and means["MPT"] <= means["SPT"] <= means["SPS"]
    shown = ", ".join(f"{p}={v:.3f}" for p, v in means.items())
    record(8, ok, f"corpus-mean E[T] {shown}")
    assert ok


# 9 ---------------------------------------------------------------------------


def _digests(d: Path):
    return {p.name: sha256_file(p) for p in sorted(d.iterdir()) if p.is_file()}


def test_criterion_9_determinism(tmp_path):
    topo = tmp_path / "det.json"
    topo.write_text(json.dumps(random_topology(14, seed=77, extra=0.25, name="det").to_dict()))
    summaries = tmp_path / "sim_a"
    commands = {
        "simulate": ["simulate", "-t", str(topo), "-p", "all", "-n", "300", "--seed", "4"],
        "trim": ["trim", "-t", str(topo), "-p", "mpt", "-n", "300", "--seed", "4", "--threshold", "0.9,0.5"],
        "metrics": ["metrics", "-t", str(topo)],
        "cluster": ["cluster", "--summaries", str(summaries), "--k", "1", "--seed", "2"],
    }
    same = {}
    for name, args in commands.items():
        dirs = [summaries, tmp_path / "sim_b"] if name == "simulate" else [tmp_path / f"{name}_a", tmp_path / f"{name}_b"]
        flags = [[], []]
        if name in ("simulate", "trim"):
            dirs.append(tmp_path / f"{name}_threads")
            flags.append(["--threads", "2"])
        codes = [main(args + ["--out", str(d)] + extra) for d, extra in zip(dirs, flags)]
        outs = [_digests(d) for d in dirs]
        same[name] = codes == [0] * len(dirs) and all(o == outs[0] for o in outs) and len(outs[0]) > 1
    ok = all(same.values())
    record(9, ok, "byte-identical reruns: " + ", ".join(f"{k}={v}" for k, v in same.items()))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
