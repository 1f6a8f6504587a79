"""Per-page capture model and HTML digestion.

A snapshot file is a JSON document holding everything a browser sees when
loading one page: starting/landing URLs, the redirection chain, resource
URLs logged during load, outgoing anchor URLs, rendered text, title,
copyright notice, optional pre-extracted image terms and element counts.
Files may instead carry ``raw_html``; missing digested fields are then
filled by a best-effort HTML pass. Explicit fields always win.

Links split into internal and external by registered domain: every RDN
seen in the redirection chain is treated as owner-controlled, and a link
is internal exactly when its RDN is in that set.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urljoin

from .terms import extract_terms
from .urlparts import SuffixList, UrlParseError, UrlParts, parse_url

log = logging.getLogger(__name__)

LABEL_PHISH = "phish"
LABEL_LEGITIMATE = "legitimate"

_LIST_FIELDS = ("redirection_chain", "logged_links", "href_links")
_COUNT_FIELDS = ("input_count", "image_count", "iframe_count")


class MalformedSnapshot(ValueError):
    """Raised when a snapshot file violates the documented format."""


@dataclass(frozen=True)
class PageSnapshot:
    starting_url: str
    landing_url: str
    redirection_chain: tuple[str, ...]
    logged_links: tuple[str, ...] = ()
    href_links: tuple[str, ...] = ()
    text: str = ""
    title: str = ""
    copyright: str = ""
    image_terms: tuple[str, ...] | None = None
    input_count: int = 0
    image_count: int = 0
    iframe_count: int = 0
    label: str | None = None


@dataclass(frozen=True)
class LinkSplit:
    """Internal/external partition of a snapshot's logged and href links."""

    internal_logged: tuple[str, ...]
    external_logged: tuple[str, ...]
    internal_href: tuple[str, ...]
    external_href: tuple[str, ...]
    internal_rdns: frozenset[str]
    dropped: int = 0


@dataclass
class HtmlDigest:
    text: str = ""
    title: str = ""
    href_links: list[str] = field(default_factory=list)
    copyright: str = ""
    input_count: int = 0
    image_count: int = 0
    iframe_count: int = 0


class _Digester(HTMLParser):
    """Single-pass tag walker collecting the digest fields.

    Character data counts as page text only inside <body> and outside
    <script>/<style>. Inlined iframe documents (srcdoc) are digested
    recursively; remote iframe content is never fetched.
    """

    def __init__(self, base_url: str):
        super().__init__(convert_charrefs=True)
        self.base_url = base_url
        self.chunks: list[str] = []
        self.title_chunks: list[str] = []
        self.hrefs: list[str] = []
        self.inputs = 0
        self.images = 0
        self.iframes = 0
        self._in_body = 0
        self._in_title = 0
        self._skip = 0

    def _tag(self, tag, attrs):
        if tag == "input":
            self.inputs += 1
        elif tag == "img":
            self.images += 1
        elif tag == "iframe":
            self.iframes += 1
            srcdoc = dict(attrs).get("srcdoc")
            if srcdoc:
                sub = _digest(srcdoc, self.base_url)
                self.chunks.append(sub.raw_text)
                self.hrefs.extend(sub.hrefs)
                self.inputs += sub.inputs
                self.images += sub.images
                self.iframes += sub.iframes
        elif tag == "a":
            href = dict(attrs).get("href")
            if href:
                try:
                    self.hrefs.append(urljoin(self.base_url, href.strip()))
                except ValueError:
                    pass

    def handle_starttag(self, tag, attrs):
        self._tag(tag, attrs)
        if tag == "body":
            self._in_body += 1
        elif tag == "title":
            self._in_title += 1
        elif tag in ("script", "style"):
            self._skip += 1

    def handle_startendtag(self, tag, attrs):
        self._tag(tag, attrs)

    def handle_endtag(self, tag):
        if tag == "body" and self._in_body:
            self._in_body -= 1
        elif tag == "title" and self._in_title:
            self._in_title -= 1
        elif tag in ("script", "style") and self._skip:
            self._skip -= 1

    def handle_data(self, data):
        if self._in_title:
            self.title_chunks.append(data)
        elif self._in_body and not self._skip:
            self.chunks.append(data)

    @property
    def raw_text(self) -> str:
        return "".join(self.chunks)


def _digest(raw_html: str, base_url: str) -> _Digester:
    parser = _Digester(base_url)
    try:
        parser.feed(raw_html)
        parser.close()
    except Exception:  # malformed markup: keep whatever was collected
        pass
    return parser


def _find_copyright(raw_text: str) -> str:
    for line in raw_text.splitlines():
        if "©" in line or "copyright" in extract_terms(line):
            return " ".join(line.split())
    return ""


def digest_html(raw_html: str, base_url: str) -> HtmlDigest:
    """Best-effort extraction of text, title, links, notice and counts.

    Never raises on malformed HTML; whitespace in text and title is
    collapsed to single spaces.
    """
    parser = _digest(raw_html, base_url)
    return HtmlDigest(
        text=" ".join(parser.raw_text.split()),
        title=" ".join("".join(parser.title_chunks).split()),
        href_links=parser.hrefs,
        copyright=_find_copyright(parser.raw_text),
        input_count=parser.inputs,
        image_count=parser.images,
        iframe_count=parser.iframes,
    )


def _normalize_label(value) -> str | None:
    if value is None:
        return None
    label = str(value).strip().lower()
    if label in ("phish", "phishing"):
        return LABEL_PHISH
    if label in ("legit", "legitimate"):
        return LABEL_LEGITIMATE
    raise MalformedSnapshot(f"unknown label {value!r}")


def load_snapshot(path: str | Path, suffixes: SuffixList) -> PageSnapshot:
    """Read one snapshot file, digesting raw HTML for absent fields."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise MalformedSnapshot(f"cannot read snapshot {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedSnapshot(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedSnapshot(f"snapshot {path} is not a JSON object")

    for key in ("starting_url", "landing_url"):
        if not isinstance(doc.get(key), str) or not doc.get(key):
            raise MalformedSnapshot(f"snapshot {path} missing {key}")
    starting_url = doc["starting_url"]
    landing_url = doc["landing_url"]
    for key, url in (("starting_url", starting_url), ("landing_url", landing_url)):
        try:
            parse_url(url, suffixes)
        except UrlParseError as exc:
            raise MalformedSnapshot(f"unparseable {key} in {path}: {exc}") from exc

    digest = None
    if isinstance(doc.get("raw_html"), str):
        digest = digest_html(doc["raw_html"], landing_url)

    def pick(key, default):
        if key in doc:
            return doc[key]
        if digest is not None and hasattr(digest, key):
            return getattr(digest, key)
        return default

    chain = doc.get("redirection_chain")
    if chain is None:
        chain = [starting_url] if starting_url == landing_url else [starting_url, landing_url]
    if not isinstance(chain, list) or not chain:
        raise MalformedSnapshot(f"empty redirection chain in {path}")
    if chain[0] != starting_url or chain[-1] != landing_url:
        raise MalformedSnapshot(
            f"redirection chain of {path} does not run starting->landing"
        )

    counts = {}
    for key in _COUNT_FIELDS:
        value = pick(key, 0)
        if not isinstance(value, int) or value < 0:
            raise MalformedSnapshot(f"{key} in {path} must be a non-negative integer")
        counts[key] = value

    image_terms = doc.get("image_terms")
    if image_terms is not None:
        if not isinstance(image_terms, list):
            raise MalformedSnapshot(f"image_terms in {path} must be a list")
        image_terms = tuple(str(t) for t in image_terms)

    return PageSnapshot(
        starting_url=starting_url,
        landing_url=landing_url,
        redirection_chain=tuple(str(u) for u in chain),
        logged_links=tuple(str(u) for u in doc.get("logged_links", []) or []),
        href_links=tuple(str(u) for u in pick("href_links", []) or []),
        text=str(pick("text", "")),
        title=str(pick("title", "")),
        copyright=str(pick("copyright", "")),
        image_terms=image_terms,
        input_count=counts["input_count"],
        image_count=counts["image_count"],
        iframe_count=counts["iframe_count"],
        label=_normalize_label(doc.get("label")),
    )


def parse_urls(urls, suffixes: SuffixList) -> list[UrlParts]:
    """Parse a URL list, silently dropping members that do not parse."""
    out = []
    for url in urls:
        try:
            out.append(parse_url(url, suffixes))
        except UrlParseError:
            continue
    return out


def split_links(snap: PageSnapshot, suffixes: SuffixList) -> LinkSplit:
    """Partition logged and href links by redirection-chain RDNs.

    Unparseable links are dropped and counted, not fatal.
    """
    internal_rdns = frozenset(
        p.rdn for p in parse_urls(snap.redirection_chain, suffixes)
    )
    dropped = 0
    buckets: dict[str, list[str]] = {
        "internal_logged": [],
        "external_logged": [],
        "internal_href": [],
        "external_href": [],
    }
    for kind, urls in (("logged", snap.logged_links), ("href", snap.href_links)):
        for url in urls:
            try:
                parts = parse_url(url, suffixes)
            except UrlParseError:
                dropped += 1
                continue
            side = "internal" if parts.rdn in internal_rdns else "external"
            buckets[f"{side}_{kind}"].append(url)
    if dropped:
        log.warning("dropped %d unparseable links for %s", dropped, snap.starting_url)
    return LinkSplit(
        internal_logged=tuple(buckets["internal_logged"]),
        external_logged=tuple(buckets["external_logged"]),
        internal_href=tuple(buckets["internal_href"]),
        external_href=tuple(buckets["external_href"]),
        internal_rdns=internal_rdns,
        dropped=dropped,
    )
