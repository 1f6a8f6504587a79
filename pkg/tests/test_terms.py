import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phishkit.snapshot import split_links
from phishkit.terms import (
    SOURCE_IDS,
    TermDistribution,
    build_all_distributions,
    build_distribution,
    canonicalize,
    extract_terms,
    hellinger,
)
from phishkit.urlparts import parse_url


def hellinger_oracle(p: dict, q: dict) -> float:
    # direct two-pass evaluation over the sorted union support
    if not p and not q:
        return 0.0
    if not p or not q:
        return 1.0
    acc = 0.0
    for term in sorted(set(p) | set(q)):
        acc += (math.sqrt(p.get(term, 0.0)) - math.sqrt(q.get(term, 0.0))) ** 2
    return acc / 2.0


def random_distribution(rng: random.Random, max_terms: int = 8) -> dict:
    n = rng.randint(1, max_terms)
    terms = rng.sample(
        ["alpha", "beta", "gamma", "delta", "omega", "kappa", "sigma",
         "theta", "lambda", "zeta"], n,
    )
    weights = [rng.random() + 1e-9 for _ in terms]
    total = sum(weights)
    return {t: w / total for t, w in zip(terms, weights)}


# ---------------------------------------------------------------- canonical

def test_letterforms_map_to_base_letter():
    assert canonicalize("B") == "b"
    assert canonicalize("β") == "b"      # Greek beta
    assert canonicalize("b̀") == "b"     # combining grave
    assert canonicalize("b̂") == "b"     # combining circumflex


def test_lowercase_ascii_unchanged():
    assert canonicalize("abc") == "abc"


def test_accented_word():
    # per-character oracle: Ü -> u, n -> n, ï -> i, t/e/d unchanged
    expected = "".join({"Ü": "u", "ï": "i"}.get(c, c.lower()) for c in "Ünïted")
    assert canonicalize("Ünïted") == expected == "united"


def test_unmappable_characters_pass_through():
    assert canonicalize("a中b") == "a中b"  # CJK stays, splits terms later
    assert extract_terms("abc中def") == ["abc", "def"]


# ------------------------------------------------------------------- terms

def test_extract_terms_hostname():
    assert extract_terms("www.amazon.co.uk") == ["www", "amazon"]


def test_extract_terms_mixed_separators():
    assert extract_terms("PayPal-Secure1Login") == ["paypal", "secure", "login"]


def test_extract_terms_all_short():
    assert extract_terms("a.b.c") == []


@given(st.text(max_size=80))
@settings(max_examples=200, deadline=None)
def test_extract_terms_alphabet_and_length(text):
    for term in extract_terms(text):
        assert len(term) >= 3
        assert all("a" <= c <= "z" for c in term)


def test_extract_terms_preserves_order_and_multiplicity():
    assert extract_terms("foo bar foo") == ["foo", "bar", "foo"]


# ----------------------------------------------------------- distributions

def test_distribution_frequencies():
    dist = build_distribution("text", ["foo foo bar"])
    assert dist.entries == {"foo": pytest.approx(2 / 3), "bar": pytest.approx(1 / 3)}


def test_distribution_empty_input():
    assert build_distribution("text", []).entries == {}
    assert build_distribution("text", ["a b c"]).entries == {}


@given(st.lists(st.text(max_size=40), max_size=6))
@settings(max_examples=100, deadline=None)
def test_distribution_normalized(texts):
    dist = build_distribution("text", texts)
    if dist.entries:
        assert abs(sum(dist.entries.values()) - 1.0) < 1e-9
        assert all(0.0 < p <= 1.0 for p in dist.entries.values())


def test_start_distribution_uses_starting_free_url(suffixes, snapshots):
    snap = snapshots["phish_securebank"]
    split = split_links(snap, suffixes)
    start = parse_url(snap.starting_url, suffixes)
    land = parse_url(snap.landing_url, suffixes)
    dists = build_all_distributions(snap, split, start, land, suffixes)
    assert set(dists) == set(SOURCE_IDS)
    # free part of the starting URL: subdomain labels and path/query terms
    assert set(dists["start"].entries) == {
        "secure", "bank", "login", "account", "verify",
    }


def test_empty_external_sources(suffixes, snapshots):
    snap = snapshots["legit_zunvia"]  # all links internal
    split = split_links(snap, suffixes)
    start = parse_url(snap.starting_url, suffixes)
    dists = build_all_distributions(snap, split, start, start, suffixes)
    assert dists["extlog"].entries == {}
    assert dists["extlink"].entries == {}
    assert dists["extrdn"].entries == {}


def test_intrdn_merges_logged_and_href(suffixes, snapshots):
    snap = snapshots["phish_securebank"]
    split = split_links(snap, suffixes)
    start = parse_url(snap.starting_url, suffixes)
    dists = build_all_distributions(snap, split, start, start, suffixes)
    # internal logged (cdn.phishhost.tk) and internal href both have RDN
    # phishhost.tk; the merged source holds its terms
    assert "phishhost" in dists["intrdn"]


def test_image_distribution_from_image_terms(suffixes, snapshots):
    import dataclasses

    snap = snapshots["phish_securebank"]
    split = split_links(snap, suffixes)
    start = parse_url(snap.starting_url, suffixes)
    snap2 = dataclasses.replace(snap, image_terms=("PayPal", "Login"))
    dists = build_all_distributions(snap2, split, start, start, suffixes)
    assert dists["image"].entries == {"paypal": 0.5, "login": 0.5}


# --------------------------------------------------------------- hellinger

def test_hellinger_identical_is_zero():
    p = TermDistribution("a", {"foo": 0.5, "bar": 0.5})
    assert hellinger(p, p) == 0.0


def test_hellinger_disjoint_is_one():
    p = TermDistribution("a", {"foo": 1.0})
    q = TermDistribution("b", {"bar": 1.0})
    assert hellinger(p, q) == pytest.approx(1.0)


def test_hellinger_known_value():
    p = TermDistribution("a", {"a": 1.0})
    q = TermDistribution("b", {"a": 0.5, "b": 0.5})
    expected = 0.5 * ((1 - math.sqrt(0.5)) ** 2 + 0.5)
    assert hellinger(p, q) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.2928932188134524, abs=1e-12)


def test_hellinger_empty_conventions():
    empty = TermDistribution("e")
    full = TermDistribution("f", {"foo": 1.0})
    assert hellinger(empty, TermDistribution("e2")) == 0.0
    assert hellinger(empty, full) == 1.0
    assert hellinger(full, empty) == 1.0


def test_hellinger_matches_oracle_on_random_pairs():
    rng = random.Random(20150723)
    for _ in range(1000):
        p = random_distribution(rng)
        q = random_distribution(rng)
        got = hellinger(TermDistribution("p", p), TermDistribution("q", q))
        want = hellinger_oracle(p, q)
        assert abs(got - want) < 1e-12
        assert 0.0 <= got <= 1.0 + 1e-12


def test_hellinger_symmetry():
    rng = random.Random(7)
    for _ in range(200):
        p = TermDistribution("p", random_distribution(rng))
        q = TermDistribution("q", random_distribution(rng))
        assert hellinger(p, q) == pytest.approx(hellinger(q, p), abs=1e-15)
