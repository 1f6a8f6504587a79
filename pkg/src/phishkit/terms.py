"""Term extraction and term-distribution comparison.

A term is a string over the 26 lowercase letters with length >= 3.
Extraction canonicalizes letterforms to a-z, splits on every other
character, and drops short fragments. Each data source of a page yields
one distribution of term relative frequencies; distributions are compared
with the squared Hellinger distance, bounded in [0, 1].
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:  # pragma: no cover
    from .snapshot import LinkSplit, PageSnapshot
    from .urlparts import SuffixList, UrlParts

# Identifiers of the per-page data sources, one distribution each.
SOURCE_IDS = (
    "text",
    "title",
    "copyright",
    "image",
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

# Greek/Cyrillic letterforms and Latin specials that visually match an
# a-z letter but survive compatibility decomposition unchanged.
_LETTERFORMS = {
    # Greek
    "α": "a", "β": "b", "γ": "y", "ε": "e", "ζ": "z",
    "η": "n", "ι": "i", "κ": "k", "ν": "v", "ο": "o",
    "ρ": "p", "τ": "t", "υ": "u", "χ": "x", "ω": "w",
    # Cyrillic
    "а": "a", "в": "b", "е": "e", "к": "k", "м": "m",
    "н": "h", "о": "o", "р": "p", "с": "c", "т": "t",
    "у": "y", "х": "x", "ѕ": "s", "і": "i", "ј": "j",
    "һ": "h", "ԛ": "q", "ԝ": "w",
    # Latin letters with no decomposition
    "ø": "o", "đ": "d", "ð": "d", "ł": "l",
    "æ": "ae", "œ": "oe",
}

_TERM_RE = re.compile(r"[a-z]+")


def canonicalize(text: str) -> str:
    """Map letter characters onto lowercase a-z where a match exists.

    Uppercase is lowered, accents are removed via compatibility
    decomposition, and known lookalike letterforms are substituted.
    Characters without an a-z mapping pass through unchanged and act as
    separators during term extraction.
    """
    out: list[str] = []
    for ch in unicodedata.normalize("NFKD", text):
        if unicodedata.combining(ch):
            continue
        for low in ch.casefold():
            out.append(_LETTERFORMS.get(low, low))
    return "".join(out)


def extract_terms(text: str) -> list[str]:
    """All terms of `text`, in order, with multiplicity."""
    return [t for t in _TERM_RE.findall(canonicalize(text)) if len(t) >= 3]


@dataclass(frozen=True)
class TermDistribution:
    """Relative term frequencies for one data source. May be empty."""

    source_id: str
    entries: dict[str, float] = field(default_factory=dict)

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def probability(self, term: str) -> float:
        return self.entries.get(term, 0.0)


def build_distribution(source_id: str, texts: Iterable[str]) -> TermDistribution:
    """Term distribution over every term extracted from `texts`."""
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(extract_terms(text))
    total = sum(counts.values())
    if total == 0:
        return TermDistribution(source_id)
    return TermDistribution(
        source_id, {term: c / total for term, c in counts.items()}
    )


def hellinger(p: TermDistribution, q: TermDistribution) -> float:
    """Squared Hellinger distance in [0, 1].

    0.5 * sum over the union support of (sqrt(P(x)) - sqrt(Q(x)))^2.
    Two empty distributions compare as 0; empty against non-empty as 1.
    """
    if not p.entries and not q.entries:
        return 0.0
    if not p.entries or not q.entries:
        return 1.0
    acc = 0.0
    for term in p.entries.keys() | q.entries.keys():
        diff = math.sqrt(p.probability(term)) - math.sqrt(q.probability(term))
        acc += diff * diff
    return min(1.0, max(0.0, 0.5 * acc))


def _free_url_texts(parts_list: Iterable["UrlParts"]) -> list[str]:
    texts: list[str] = []
    for parts in parts_list:
        texts.extend(parts.free_url)
    return texts


def build_all_distributions(
    snap: "PageSnapshot",
    split: "LinkSplit",
    start: "UrlParts",
    land: "UrlParts",
    suffixes: "SuffixList",
) -> dict[str, TermDistribution]:
    """The full set of per-source distributions for one page.

    Link-based sources use the free parts or the RDN of each link URL;
    links that fail to parse are ignored. The image source comes from
    pre-extracted image terms when the snapshot carries them.
    """
    from .snapshot import parse_urls  # local import to avoid a cycle

    int_log = parse_urls(split.internal_logged, suffixes)
    ext_log = parse_urls(split.external_logged, suffixes)
    int_href = parse_urls(split.internal_href, suffixes)
    ext_href = parse_urls(split.external_href, suffixes)

    return {
        "text": build_distribution("text", [snap.text]),
        "title": build_distribution("title", [snap.title]),
        "copyright": build_distribution("copyright", [snap.copyright]),
        "image": build_distribution("image", snap.image_terms or []),
        "start": build_distribution("start", start.free_url),
        "land": build_distribution("land", land.free_url),
        "intlog": build_distribution("intlog", _free_url_texts(int_log)),
        "intlink": build_distribution("intlink", _free_url_texts(int_href)),
        "startrdn": build_distribution("startrdn", [start.rdn]),
        "landrdn": build_distribution("landrdn", [land.rdn]),
        "intrdn": build_distribution(
            "intrdn", [p.rdn for p in int_log] + [p.rdn for p in int_href]
        ),
        "extrdn": build_distribution("extrdn", [p.rdn for p in ext_log]),
        "extlog": build_distribution("extlog", _free_url_texts(ext_log)),
        "extlink": build_distribution("extlink", _free_url_texts(ext_href)),
    }
