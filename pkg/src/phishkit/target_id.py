"""Keyterm extraction and target-brand identification.

A page is summarized by keyterms: terms that occur in at least two of
five user-visible source sets (URL terms, title, text, copyright notice,
href-link terms), ranked by how often they occur in the rendered parts
(text, title, copyright). Three ranked lists exist:

  boosted_prominent  every pair of sources counts;
  prominent          a term backed only by the text/href pair is dropped,
                     since anchor captions often mirror their URLs;
  ocr_prominent      image terms intersected with the five sets.

Identification runs five steps. First, domain labels collected from the
page are checked for being composable out of the boosted keyterms
(optionally separated by dashes, digit runs, or short connectors like
"of") and each composable label is searched; a page whose own registered
domain comes back is legitimate. Next, the prominent, boosted and OCR
keyterm lists are searched in turn; result domains that also occur in an
owner-controlled part of the page become candidate targets. Finally,
candidates are ranked by how often they occur across all data sources.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import json

from .snapshot import LinkSplit, PageSnapshot, parse_urls, split_links
from .terms import canonicalize, extract_terms
from .urlparts import SuffixList, UrlParseError, parse_url

DEFAULT_KEYTERMS = 5
DEFAULT_MAX_RESULTS = 10

BOOSTED = "boosted_prominent"
PROMINENT = "prominent"
OCR = "ocr_prominent"

LEGITIMATE_CONFIRMED = "legitimate_confirmed"
PHISH_WITH_TARGETS = "phish_with_targets"
SUSPICIOUS_NO_TARGET = "suspicious_no_target"

_CONNECTOR_MAX = 2  # leftover letters allowed between two keyterms
_SEPARATORS = set("-0123456789")


class SearchClientError(Exception):
    """A search backend failed; surfaces to the caller, never a verdict."""


class SearchClient(Protocol):
    def query(self, text: str, max_results: int) -> list[tuple[str, str]]:
        """Return up to max_results (rdn, mld) pairs for a query string."""
        ...


class FixtureSearchClient:
    """Offline search backend: a JSON map of query string -> result list."""

    def __init__(self, index: dict[str, list]):
        self._index = {
            q: [(str(r[0]), str(r[1])) for r in results]
            for q, results in index.items()
        }

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureSearchClient":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def query(self, text: str, max_results: int) -> list[tuple[str, str]]:
        return self._index.get(text, [])[:max_results]


@dataclass(frozen=True)
class KeytermList:
    kind: str
    terms: tuple[str, ...]
    limit: int = DEFAULT_KEYTERMS


@dataclass(frozen=True)
class TargetVerdict:
    status: str
    candidates: tuple[tuple[str, int], ...] = ()

    def top_k_targets(self, k: int) -> tuple[str, ...]:
        return tuple(mld for mld, _ in self.candidates[:k])


@dataclass
class _PageTerms:
    """Term sets and counters shared by keyterm and candidate logic."""

    url_set: frozenset[str]
    title_set: frozenset[str]
    text_set: frozenset[str]
    copyright_set: frozenset[str]
    href_set: frozenset[str]
    visible_counts: Counter
    all_counts: Counter
    controlled_set: frozenset[str]
    canonical_title: str

    @property
    def five_sets(self):
        return (
            self.url_set,
            self.title_set,
            self.text_set,
            self.copyright_set,
            self.href_set,
        )


def _free_terms(parts) -> list[str]:
    out: list[str] = []
    for text in parts.free_url:
        out += extract_terms(text)
    return out


def _page_terms(snap: PageSnapshot, split: LinkSplit, suffixes: SuffixList) -> _PageTerms:
    start = parse_url(snap.starting_url, suffixes)
    land = parse_url(snap.landing_url, suffixes)
    int_log = parse_urls(split.internal_logged, suffixes)
    ext_log = parse_urls(split.external_logged, suffixes)
    int_href = parse_urls(split.internal_href, suffixes)
    ext_href = parse_urls(split.external_href, suffixes)

    url_terms: list[str] = []
    for parts in (start, land):
        url_terms += _free_terms(parts) + extract_terms(parts.rdn)

    href_terms: list[str] = []
    for parts in int_href + ext_href:
        href_terms += _free_terms(parts)

    text_terms = extract_terms(snap.text)
    title_terms = extract_terms(snap.title)
    copyright_terms = extract_terms(snap.copyright)

    visible = Counter(text_terms) + Counter(title_terms) + Counter(copyright_terms)

    everything = Counter(visible)
    everything.update(url_terms)
    for term in snap.image_terms or ():
        everything.update(extract_terms(term))
    for parts in int_log + ext_log + int_href + ext_href:
        everything.update(_free_terms(parts))
        everything.update(extract_terms(parts.rdn))

    controlled: set[str] = set(text_terms) | set(title_terms)
    for parts in (start, land, *int_log, *int_href):
        controlled.update(_free_terms(parts))

    return _PageTerms(
        url_set=frozenset(url_terms),
        title_set=frozenset(title_terms),
        text_set=frozenset(text_terms),
        copyright_set=frozenset(copyright_terms),
        href_set=frozenset(href_terms),
        visible_counts=visible,
        all_counts=everything,
        controlled_set=frozenset(controlled),
        canonical_title=canonicalize(snap.title),
    )


def _ranked(terms, counts: Counter, n: int) -> tuple[str, ...]:
    ordered = sorted(terms, key=lambda t: (-counts[t], t))
    return tuple(ordered[:n])


def _keyterms(
    snap: PageSnapshot,
    suffixes: SuffixList,
    kind: str,
    n: int,
    page: _PageTerms | None = None,
) -> KeytermList:
    page = page or _page_terms(snap, split_links(snap, suffixes), suffixes)
    sets = page.five_sets
    if kind == OCR:
        image = set()
        for term in snap.image_terms or ():
            image.update(extract_terms(term))
        pool = {t for t in image if any(t in s for s in sets)}
        return KeytermList(OCR, _ranked(pool, page.visible_counts, n), n)

    pool = set()
    for term in set().union(*sets):
        holders = [i for i, s in enumerate(sets) if term in s]
        if len(holders) < 2:
            continue
        if kind == PROMINENT and holders == [2, 4]:  # text and href only
            continue
        pool.add(term)
    return KeytermList(kind, _ranked(pool, page.visible_counts, n), n)


def keyterms_boosted(
    snap: PageSnapshot, suffixes: SuffixList, n: int = DEFAULT_KEYTERMS
) -> KeytermList:
    return _keyterms(snap, suffixes, BOOSTED, n)


def keyterms_prominent(
    snap: PageSnapshot, suffixes: SuffixList, n: int = DEFAULT_KEYTERMS
) -> KeytermList:
    return _keyterms(snap, suffixes, PROMINENT, n)


def keyterms_ocr(
    snap: PageSnapshot, suffixes: SuffixList, n: int = DEFAULT_KEYTERMS
) -> KeytermList:
    return _keyterms(snap, suffixes, OCR, n)


def composable(mld: str, keyterms) -> bool:
    """Whether `mld` can be built out of the keyterms.

    Keyterms may be separated by dashes or digit runs anywhere, and by a
    short (< 3 letters) connector when a keyterm follows directly, so
    "bankofamerica" composes from {bank, america}. At least one keyterm
    must be consumed.
    """
    mld = canonicalize(mld)
    terms = sorted({t for t in keyterms if t}, key=len, reverse=True)
    if not mld or not terms:
        return False
    n = len(mld)
    START, TERM, PENDING = 0, 1, 2  # PENDING: a connector awaits its keyterm
    seen: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = [(0, START)]
    while stack:
        pos, tag = stack.pop()
        if (pos, tag) in seen:
            continue
        seen.add((pos, tag))
        if pos == n:
            if tag == TERM:
                return True
            continue
        for term in terms:
            if mld.startswith(term, pos):
                stack.append((pos + len(term), TERM))
        j = pos
        while j < n and mld[j] in _SEPARATORS:
            j += 1
        if j > pos:
            stack.append((j, tag))
        if tag == TERM:
            for length in range(1, _CONNECTOR_MAX + 1):
                end = pos + length
                if end < n and mld[pos:end].isalpha():
                    stack.append((end, PENDING))
    return False


def guess_fqdns(
    snap: PageSnapshot,
    keyterms: KeytermList,
    suffixes: SuffixList,
    split: LinkSplit | None = None,
) -> list[str]:
    """Domain labels from the page that compose out of the keyterms."""
    split = split or split_links(snap, suffixes)
    mlds: list[str] = []
    sources = [snap.starting_url, snap.landing_url]
    sources += list(snap.logged_links) + list(snap.href_links)
    for parts in parse_urls(sources, suffixes):
        if parts.mld and parts.mld not in mlds:
            mlds.append(parts.mld)
    return [m for m in mlds if composable(m, keyterms.terms)]


def _query(client: SearchClient, text: str, max_results: int):
    try:
        return list(client.query(text, max_results))
    except SearchClientError:
        raise
    except Exception as exc:
        raise SearchClientError(f"search backend failed: {exc}") from exc


def _candidate_in_controlled(mld: str, page: _PageTerms) -> bool:
    term = canonicalize(mld)
    if not term:
        return False
    return term in page.controlled_set or (
        len(term) >= 3 and term in page.canonical_title
    )


def identify_target(
    snap: PageSnapshot,
    suffixes: SuffixList,
    client: SearchClient,
    n_keyterms: int = DEFAULT_KEYTERMS,
    max_results: int = DEFAULT_MAX_RESULTS,
) -> TargetVerdict:
    """Run the five-step identification process for one page."""
    split = split_links(snap, suffixes)
    page = _page_terms(snap, split, suffixes)
    suspect_rdns = set()
    for url in (snap.starting_url, snap.landing_url):
        try:
            suspect_rdns.add(parse_url(url, suffixes).rdn)
        except UrlParseError:
            pass

    boosted = _keyterms(snap, suffixes, BOOSTED, n_keyterms, page)

    # Step 1: search every composable domain label from the page itself.
    for guess in guess_fqdns(snap, boosted, suffixes, split):
        results = _query(client, guess, max_results)
        if suspect_rdns & {rdn for rdn, _ in results}:
            return TargetVerdict(LEGITIMATE_CONFIRMED)

    candidates: list[str] = []

    def search_keyterms(keyterms: KeytermList):
        """Query one keyterm list; returns 'legit', 'found' or 'none'."""
        if not keyterms.terms:
            return "none"
        results = _query(client, " ".join(keyterms.terms), max_results)
        if suspect_rdns & {rdn for rdn, _ in results}:
            return "legit"
        found = False
        for _, mld in results:
            if _candidate_in_controlled(mld, page) and mld not in candidates:
                candidates.append(mld)
                found = True
        return "found" if found else "none"

    # Steps 2-4: prominent, boosted, then OCR keyterms.
    for kind in (PROMINENT, BOOSTED, OCR):
        keyterms = (
            boosted if kind == BOOSTED else _keyterms(snap, suffixes, kind, n_keyterms, page)
        )
        outcome = search_keyterms(keyterms)
        if outcome == "legit":
            return TargetVerdict(LEGITIMATE_CONFIRMED)
        if outcome == "found":
            break

    # Step 5: rank candidates by occurrences across all data sources.
    if not candidates:
        return TargetVerdict(SUSPICIOUS_NO_TARGET)
    order = {mld: i for i, mld in enumerate(candidates)}
    counted = [(mld, int(page.all_counts[canonicalize(mld)])) for mld in candidates]
    counted.sort(key=lambda item: (-item[1], order[item[0]]))
    return TargetVerdict(PHISH_WITH_TARGETS, tuple(counted))
