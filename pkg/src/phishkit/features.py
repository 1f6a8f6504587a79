"""The 212-value numeric representation of a page snapshot.

Five blocks, concatenated in a fixed order:

  1. url (106)        lexical statistics of the starting URL (9), the
                      landing URL (9) and of the four link sets: internal
                      logged, external logged, internal href, external
                      href (22 each: https ratio + mean/median/stdev of
                      seven per-URL statistics).
  2. consistency (66) pairwise squared Hellinger distances between the 12
                      term distributions built from text, title, URLs and
                      links (copyright and image sources are excluded).
  3. mld usage (22)   presence flags and substring-probability sums of the
                      starting/landing main level domain across sources.
  4. rdn usage (13)   redirection and registered-domain consistency
                      statistics.
  5. content (5)      term counts of text and title plus input, image and
                      iframe element counts.

The per-URL statistics (block 1) are: https protocol flag, dot count over
the free parts, level-domain count, URL length, FQDN length, mld length,
term count of the whole URL, term count of the mld, and popularity rank
of the RDN (defaulting to 1,000,001 when unlisted).

The rdn-usage block is a reconstruction from the stated intent (more
internal domains and less redirection on legitimate pages); its 13
statistics are fixed here and documented in the README.

Feature names are stable identifiers; reordering or renaming them is a
breaking change. The shipped manifest ``data/feature_names_v1.txt``
mirrors FEATURE_NAMES one per line.
"""

from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass
from pathlib import Path

from .snapshot import LinkSplit, PageSnapshot, parse_urls, split_links
from .terms import TermDistribution, build_all_distributions, extract_terms, hellinger
from .terms import canonicalize
from .urlparts import SuffixList, UrlParts, count_level_domains, parse_url

log = logging.getLogger(__name__)

DEFAULT_RANK = 1_000_001

# Per-URL statistics aggregated over link sets (single-URL features 3-9).
_URL_STAT_NAMES = (
    "level_domains",
    "url_length",
    "fqdn_length",
    "mld_length",
    "url_terms",
    "mld_terms",
    "alexa_rank",
)

_SINGLE_NAMES = ("protocol_https", "freeurl_dots") + _URL_STAT_NAMES

_LINK_SETS = ("intlog", "extlog", "intlink", "extlink")

# Distribution order for the consistency block (image/copyright excluded).
F2_SOURCES = (
    "text",
    "title",
    "start",
    "land",
    "intlog",
    "intlink",
    "startrdn",
    "landrdn",
    "intrdn",
    "extrdn",
    "extlog",
    "extlink",
)

_F3_FLAG_SOURCES = ("text", "title", "intlog", "extlog", "intlink", "extlink")
_F3_SUM_SOURCES = ("title", "intlog", "extlog", "intlink", "extlink")

_F4_NAMES = (
    "rdn_redirect_count",
    "rdn_chain_distinct",
    "rdn_start_equals_land",
    "rdn_internal_set_size",
    "rdn_extlog_distinct",
    "rdn_extlink_distinct",
    "rdn_intlog_ratio",
    "rdn_intlink_ratio",
    "rdn_logged_count",
    "rdn_href_count",
    "rdn_land_in_href",
    "rdn_ext_overlap_jaccard",
    "rdn_internal_fraction",
)

_F5_NAMES = (
    "content_text_terms",
    "content_title_terms",
    "content_input_count",
    "content_image_count",
    "content_iframe_count",
)


def _build_feature_names() -> tuple[str, ...]:
    names: list[str] = []
    for which in ("start", "land"):
        names.extend(f"{which}_{n}" for n in _SINGLE_NAMES)
    for group in _LINK_SETS:
        names.append(f"{group}_https_ratio")
        for stat in _URL_STAT_NAMES:
            names.extend(
                f"{group}_{stat}_{agg}" for agg in ("mean", "median", "stdev")
            )
    for i, a in enumerate(F2_SOURCES):
        for b in F2_SOURCES[i + 1 :]:
            names.append(f"h2_{a}_{b}")
    for which in ("start", "land"):
        names.extend(f"mld_{which}_in_{src}" for src in _F3_FLAG_SOURCES)
    for which in ("start", "land"):
        names.extend(f"mld_{which}_psum_{src}" for src in _F3_SUM_SOURCES)
    names.extend(_F4_NAMES)
    names.extend(_F5_NAMES)
    return tuple(names)


FEATURE_NAMES: tuple[str, ...] = _build_feature_names()
N_FEATURES = len(FEATURE_NAMES)
BLOCK_SIZES = (106, 66, 22, 13, 5)

assert N_FEATURES == sum(BLOCK_SIZES) == 212


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ValueError(
                f"expected {len(self.names)} values, got {len(self.values)}"
            )


class AlexaRanks:
    """Popularity ranks keyed by registered domain name."""

    def __init__(self, ranks: dict[str, int], skipped: int = 0):
        self._ranks = ranks
        self.skipped = skipped

    def __len__(self) -> int:
        return len(self._ranks)

    def rank(self, rdn: str) -> int:
        return self._ranks.get(rdn.lower(), DEFAULT_RANK)


def load_alexa(path: str | Path) -> AlexaRanks:
    """Read a "rank,domain" CSV; malformed lines are skipped and counted."""
    ranks: dict[str, int] = {}
    skipped = 0
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rank = int(row[0])
                domain = row[1].strip().lower()
                if not domain:
                    raise ValueError("empty domain")
            except (ValueError, IndexError):
                skipped += 1
                continue
            ranks.setdefault(domain, rank)
    if skipped:
        log.warning("skipped %d malformed rank lines in %s", skipped, path)
    return AlexaRanks(ranks, skipped)


def url_features_single(parts: UrlParts, alexa: AlexaRanks) -> list[float]:
    """The nine per-URL statistics for one parsed URL."""
    sub, tail = parts.free_url
    return [
        1.0 if parts.protocol == "https" else 0.0,
        float(sub.count(".") + tail.count(".")),
        float(count_level_domains(parts)),
        float(len(parts.url)),
        float(len(parts.fqdn)),
        float(len(parts.mld)),
        float(len(extract_terms(parts.url))),
        float(len(extract_terms(parts.mld))),
        float(alexa.rank(parts.rdn)),
    ]


def url_features_set(urls, alexa: AlexaRanks, suffixes: SuffixList) -> list[float]:
    """https ratio plus mean/median/stdev of statistics 3-9 over a URL set.

    An empty (or fully unparseable) set yields 22 zeros. The standard
    deviation is the population form, so a singleton set gives 0.
    """
    parsed = parse_urls(urls, suffixes)
    if not parsed:
        return [0.0] * 22
    singles = [url_features_single(p, alexa) for p in parsed]
    out = [sum(s[0] for s in singles) / len(singles)]
    for col in range(2, 9):
        column = [s[col] for s in singles]
        out.extend(
            (
                statistics.fmean(column),
                float(statistics.median(column)),
                statistics.pstdev(column),
            )
        )
    return out


def f1(
    start: UrlParts,
    land: UrlParts,
    split: LinkSplit,
    alexa: AlexaRanks,
    suffixes: SuffixList,
) -> list[float]:
    """URL block: 9 + 9 + 4 * 22 = 106 values."""
    out = url_features_single(start, alexa)
    out += url_features_single(land, alexa)
    for urls in (
        split.internal_logged,
        split.external_logged,
        split.internal_href,
        split.external_href,
    ):
        out += url_features_set(urls, alexa, suffixes)
    return out


def f2(dists: dict[str, TermDistribution]) -> list[float]:
    """Consistency block: squared Hellinger over all 66 source pairs."""
    out = []
    for i, a in enumerate(F2_SOURCES):
        for b in F2_SOURCES[i + 1 :]:
            out.append(hellinger(dists[a], dists[b]))
    return out


def f3(
    dists: dict[str, TermDistribution], start_mld: str, land_mld: str
) -> list[float]:
    """mld-usage block: 12 exact-presence flags then 10 substring sums.

    The text source is skipped for the sums: its many short terms match
    fragments of most mlds. An empty mld (IP host) contributes zeros.
    """
    mlds = (canonicalize(start_mld), canonicalize(land_mld))
    flags = []
    for mld in mlds:
        for src in _F3_FLAG_SOURCES:
            flags.append(1.0 if mld and mld in dists[src] else 0.0)
    sums = []
    for mld in mlds:
        for src in _F3_SUM_SOURCES:
            if not mld:
                sums.append(0.0)
                continue
            sums.append(
                sum(p for t, p in dists[src].entries.items() if t in mld)
            )
    return flags + sums


def f4(snap: PageSnapshot, split: LinkSplit, suffixes: SuffixList) -> list[float]:
    """rdn-usage block: 13 redirection/domain consistency statistics.

    Counts and ratios are over the parseable links; empty denominators
    yield 0.
    """
    chain = parse_urls(snap.redirection_chain, suffixes)
    chain_rdns = {p.rdn for p in chain}
    start_rdn = chain[0].rdn if chain else ""
    land_rdn = chain[-1].rdn if chain else ""

    ext_log_rdns = {p.rdn for p in parse_urls(split.external_logged, suffixes)}
    ext_href_rdns = {p.rdn for p in parse_urls(split.external_href, suffixes)}
    href_rdns = {p.rdn for p in parse_urls(split.internal_href, suffixes)} | ext_href_rdns

    n_log = len(split.internal_logged) + len(split.external_logged)
    n_href = len(split.internal_href) + len(split.external_href)
    n_int = len(split.internal_logged) + len(split.internal_href)
    union = ext_log_rdns | ext_href_rdns

    return [
        float(len(snap.redirection_chain) - 1),
        float(len(chain_rdns)),
        1.0 if start_rdn and start_rdn == land_rdn else 0.0,
        float(len(split.internal_rdns)),
        float(len(ext_log_rdns)),
        float(len(ext_href_rdns)),
        len(split.internal_logged) / n_log if n_log else 0.0,
        len(split.internal_href) / n_href if n_href else 0.0,
        float(n_log),
        float(n_href),
        1.0 if land_rdn and land_rdn in href_rdns else 0.0,
        len(ext_log_rdns & ext_href_rdns) / len(union) if union else 0.0,
        n_int / (n_log + n_href) if n_log + n_href else 0.0,
    ]


def f5(snap: PageSnapshot) -> list[float]:
    """Content block: text/title term counts and element counts."""
    return [
        float(len(extract_terms(snap.text))),
        float(len(extract_terms(snap.title))),
        float(snap.input_count),
        float(snap.image_count),
        float(snap.iframe_count),
    ]


def extract_features(
    snap: PageSnapshot, suffixes: SuffixList, alexa: AlexaRanks
) -> FeatureVector:
    """Compute the full ordered vector for one snapshot.

    Parse failures of the starting or landing URL propagate; links that
    fail to parse are simply excluded from the statistics.
    """
    start = parse_url(snap.starting_url, suffixes)
    land = parse_url(snap.landing_url, suffixes)
    split = split_links(snap, suffixes)
    dists = build_all_distributions(snap, split, start, land, suffixes)
    values = (
        f1(start, land, split, alexa, suffixes)
        + f2(dists)
        + f3(dists, start.mld, land.mld)
        + f4(snap, split, suffixes)
        + f5(snap)
    )
    return FeatureVector(values=tuple(float(v) for v in values))


def write_feature_csv(path: str | Path, rows, labels=None) -> None:
    """Dump vectors as CSV: the 212 names plus a trailing label column."""
    labels = list(labels) if labels is not None else [""] * len(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(FEATURE_NAMES) + ["label"])
        for vec, label in zip(rows, labels):
            values = vec.values if isinstance(vec, FeatureVector) else vec
            writer.writerow([repr(float(v)) for v in values] + [label])


def read_feature_csv(path: str | Path):
    """Read a feature CSV back into (rows, labels). Header is validated."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(FEATURE_NAMES) + ["label"]:
            raise ValueError(f"unexpected feature CSV header in {path}")
        rows, labels = [], []
        for row in reader:
            rows.append([float(v) for v in row[:-1]])
            labels.append(row[-1])
    return rows, labels
