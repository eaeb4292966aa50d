import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geosocial.demographics import (
    FEMALE,
    MALE,
    UNDETERMINED,
    CooccurrenceGraph,
    DomainError,
    GenderLexicon,
    PageRankConvergenceWarning,
    bio_word_sets,
    bio_words,
    build_cooccurrence,
    classify_gender,
    classify_users,
    filter_top_edges,
    gendered_word_counts,
    load_lexicon,
    pagerank,
    tendency,
    top_bio_keywords,
    word_tendency,
)
from geosocial.gazetteer import packaged_hierarchy_path
from helpers import corpus_of, record
from oracles import pagerank_dense

DATA = packaged_hierarchy_path().parent
LEX = GenderLexicon.from_names(["Eduardo", "José", "Alexis"], ["María", "Alexis", "Ana"])


def test_classify_examples():
    assert classify_gender(LEX, "Eduardo Pérez") == MALE
    assert classify_gender(LEX, "Alexis Soto") == UNDETERMINED
    assert classify_gender(LEX, "") == UNDETERMINED
    assert classify_gender(LEX, "maría josé") == FEMALE  # first token only
    assert classify_gender(LEX, "JOSE") == MALE


def test_packaged_lexicon_alexis():
    lex = load_lexicon(DATA / "male_names.txt", DATA / "female_names.txt")
    assert classify_gender(lex, "Alexis Soto") == UNDETERMINED
    assert lex.male_names & lex.female_names


@given(st.sampled_from(["Eduardo", "José", "María", "Ana", "Alexis", "Pedro"]),
       st.lists(st.booleans(), min_size=10, max_size=10), st.booleans())
def test_case_accent_invariance(name, upper, strip):
    variant = "".join(c.upper() if u else c.lower() for c, u in zip(name, upper))
    if strip:
        variant = variant.translate(str.maketrans("éÉáÁ", "eEaA"))
    assert classify_gender(LEX, variant + " X") == classify_gender(LEX, name)


def test_bio_words_example():
    assert bio_words("Estudiante de la vida, estudiante.", {"de", "la"}) == {"estudiante", "vida"}
    assert bio_words("", set()) == frozenset()


def test_bio_word_sets_excludes_undetermined():
    c = corpus_of([record(1, 1, name="Eduardo P", bio="futbol"),
                   record(2, 2, name="Alexis S", bio="futbol"),
                   record(3, 3, name="Ana R", bio="")])
    g = classify_users(c, LEX)
    assert bio_word_sets(c, g, frozenset()) == {1: frozenset({"futbol"}), 3: frozenset()}


def test_cooccurrence_examples():
    g = build_cooccurrence([frozenset("ab"), frozenset("ab")])
    assert g.edges == {("a", "b"): 1.0}
    g = build_cooccurrence([frozenset("ab"), frozenset("ac"), frozenset("a"), frozenset()])
    assert g.edges == {("a", "b"): 0.25, ("a", "c"): 0.25}
    assert build_cooccurrence([frozenset("a"), frozenset("b")]).edges == {}


def _graph(weights):
    edges = {(f"n{i:05d}", f"n{i:05d}x"): w for i, w in enumerate(weights)}
    nodes = frozenset(itertools.chain.from_iterable(edges))
    return CooccurrenceGraph(nodes, edges, 1)


def test_filter_counts():
    assert len(filter_top_edges(_graph([(i + 1) / 20000 for i in range(10000)])).edges) == 10
    assert len(filter_top_edges(_graph([0.1, 0.2, 0.3, 0.4, 0.5])).edges) == 1
    tied = [0.9, 0.9, 0.9] + [0.5] * 997
    assert len(filter_top_edges(_graph(tied)).edges) == 3
    assert len(filter_top_edges(_graph([0.5] * 7), 0.01).edges) == 7


def test_filter_fraction_exact():
    # 0.07 * 100 is 7.000000000000001 in binary floating point
    assert len(filter_top_edges(_graph([(i + 1) / 200 for i in range(100)]), 0.07).edges) == 7
    with pytest.raises(DomainError):
        filter_top_edges(_graph([0.5]), 0)


def test_pagerank_examples():
    tri = CooccurrenceGraph(frozenset("abc"), {("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 1.0}, 1)
    assert all(abs(v - 1 / 3) < 1e-12 for v in pagerank(tri).values())
    path = CooccurrenceGraph(frozenset("abc"), {("a", "b"): 0.5, ("b", "c"): 0.5}, 2)
    got, ref = pagerank(path), pagerank_dense("abc", path.edges)
    assert all(abs(got[w] - ref[w]) <= 1e-8 for w in "abc")
    assert pagerank(CooccurrenceGraph(frozenset("a"), {}, 1)) == {"a": 1.0}
    with pytest.raises(DomainError):
        pagerank(CooccurrenceGraph(frozenset(), {}, 0))


def test_pagerank_dangling_node():
    g = CooccurrenceGraph(frozenset("abc"), {("a", "b"): 1.0}, 1)
    got, ref = pagerank(g), pagerank_dense("abc", g.edges)
    assert all(abs(got[w] - ref[w]) <= 1e-8 for w in "abc")


def test_pagerank_nonconvergence_warns():
    g = CooccurrenceGraph(frozenset("abc"), {("a", "b"): 1.0, ("b", "c"): 0.1}, 1)
    with pytest.warns(PageRankConvergenceWarning):
        pagerank(g, max_iter=1)


@st.composite
def weighted_graphs(draw, max_nodes=8):
    n = draw(st.integers(1, max_nodes))
    nodes = [f"w{i}" for i in range(n)]
    pairs = list(itertools.combinations(nodes, 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    edges = {p: draw(st.floats(0.01, 1.0)) for p in chosen}
    return CooccurrenceGraph(frozenset(nodes), edges, 1)


@settings(max_examples=80, deadline=None)
@given(weighted_graphs(), st.randoms(use_true_random=False))
def test_pagerank_properties(g, rnd):
    s = pagerank(g)
    assert abs(sum(s.values()) - 1.0) <= 1e-9
    ref = pagerank_dense(g.nodes, g.edges)
    assert all(abs(s[w] - ref[w]) <= 1e-8 for w in g.nodes)
    # relabelling equivariance
    names = sorted(g.nodes)
    perm = dict(zip(names, rnd.sample(names, len(names))))
    relabel = {tuple(sorted((perm[a], perm[b]))): w for (a, b), w in g.edges.items()}
    s2 = pagerank(CooccurrenceGraph(frozenset(perm.values()), relabel, 1))
    assert all(abs(s[w] - s2[perm[w]]) <= 1e-9 for w in names)


@settings(max_examples=60, deadline=None)
@given(weighted_graphs(max_nodes=12), st.floats(0.001, 1.0))
def test_filter_monotone(g, frac):
    kept = filter_top_edges(g, frac)
    dropped = [w for p, w in g.edges.items() if p not in kept.edges]
    if kept.edges and dropped:
        assert min(kept.edges.values()) >= max(dropped)
    if g.edges:
        assert len(kept.edges) >= max(1, math.ceil(frac * len(g.edges) - 1e-9))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.frozensets(st.sampled_from("abcdefg")), min_size=1, max_size=15))
def test_cooccurrence_invariants(sets):
    g = build_cooccurrence(sets)
    assert all(0 < w <= 1 for w in g.edges.values())
    assert all(a < b for a, b in g.edges)
    assert len(g.edges) <= len(g.nodes) * (len(g.nodes) - 1) // 2


def test_tendency_examples():
    assert tendency(10, 0) == 1.0
    assert tendency(5, 5) == 0.0
    assert tendency(0, 3) == -1.0
    with pytest.raises(DomainError):
        tendency(0, 0)
    with pytest.raises(DomainError):
        word_tendency("x", {})


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_tendency_bounds_and_antisymmetry(m, f):
    if m + f == 0:
        return
    t = tendency(m, f)
    assert -1.0 <= t <= 1.0
    assert t == (m - f) / (m + f)
    assert tendency(f, m) == -t


def test_lexicon_swap_antisymmetry():
    users = [record(i, i, name=n, bio=b) for i, (n, b) in enumerate(
        [("Eduardo", "futbol vida"), ("Ana", "vida"), ("José", "vida mama"), ("María", "mama")], 1)]
    c = corpus_of(users)
    a = classify_users(c, LEX)
    b = classify_users(c, LEX.swapped())
    ia = gendered_word_counts(bio_word_sets(c, a, frozenset()), a)
    ib = gendered_word_counts(bio_word_sets(c, b, frozenset()), b)
    for w in ia:
        assert word_tendency(w, ia) == -word_tendency(w, ib)


def test_planted_pair_ranks_first():
    rng = random.Random(3)
    filler = [f"w{i}" for i in range(40)]
    sets, genders = {}, {}
    for uid in range(400):
        words = set(rng.sample(filler, 3))
        if rng.random() < 0.5:
            words |= {"estudiante", "universidad"}
        sets[uid] = frozenset(words)
        genders[uid] = MALE if uid % 3 else FEMALE
    top = top_bio_keywords(sets, genders, k=5)
    assert {top[0].word, top[1].word} == {"estudiante", "universidad"}
    kept = filter_top_edges(build_cooccurrence(sets.values()))
    ref = pagerank_dense(kept.nodes, kept.edges)
    assert all(abs(k.pagerank_score - ref[k.word]) <= 1e-8 for k in top)
    k0 = top[0]
    assert k0.user_share == (k0.male_users + k0.female_users) / 400


def test_top_keywords_empty_bios():
    assert top_bio_keywords({1: frozenset(), 2: frozenset()}, {1: MALE, 2: FEMALE}) == []
    assert top_bio_keywords({}, {}) == []
