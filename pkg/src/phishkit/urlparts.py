"""URL decomposition against a local public-suffix list.

A URL splits into a protocol, a fully qualified domain name (FQDN) and an
optional path/query. The FQDN itself splits into subdomains plus a
registered domain name (RDN), and the RDN into a main level domain (mld)
followed by a public suffix (ps). The parts a page owner can set freely,
the subdomain prefix and the path+query, are grouped as the "free" part
of the URL; the RDN is constrained by registration.

Suffix rules follow the published public-suffix format: one rule per line,
``*`` wildcard labels, ``!`` exception prefixes, ``//`` comments.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit


class SuffixListError(Exception):
    """Raised when a suffix-list file cannot be loaded or holds no rules."""


class UrlParseError(ValueError):
    """Raised for URLs missing a scheme or a usable host."""


@dataclass(frozen=True)
class SuffixList:
    """Parsed public-suffix rules with longest-match lookup.

    Exception rules override wildcards: for a host matching ``!www.ck``
    the suffix is the rule minus its first label (``ck``), regardless of
    ``*.ck``.
    """

    plain: frozenset[tuple[str, ...]]
    wildcard: frozenset[tuple[str, ...]]
    exception: frozenset[tuple[str, ...]]
    source_version: str = ""

    def __len__(self) -> int:
        return len(self.plain) + len(self.wildcard) + len(self.exception)

    def suffix_length(self, labels: tuple[str, ...]) -> int:
        """Number of trailing labels of `labels` forming the public suffix.

        Falls back to the default rule (last label) when nothing matches.
        """
        n = len(labels)
        for i in range(n):
            if labels[i:] in self.exception:
                return n - i - 1
        for i in range(n):
            tail = labels[i:]
            if tail in self.plain:
                return n - i
            if len(tail) >= 2 and ("*",) + tail[1:] in self.wildcard:
                return n - i
        return 1


@dataclass(frozen=True)
class UrlParts:
    """Structural decomposition of one URL.

    For IP hosts ``rdn`` equals the host literal and ``mld``, ``ps`` and
    ``subdomains`` are empty.
    """

    protocol: str
    fqdn: str
    subdomains: str
    rdn: str
    mld: str
    ps: str
    path: str
    query: str
    is_ip: bool
    url: str

    @property
    def free_url(self) -> tuple[str, str]:
        """The two owner-controlled strings: subdomain prefix, path+query."""
        tail = self.path
        if self.query:
            tail = f"{tail}?{self.query}"
        return (self.subdomains, tail)


def bundled_suffix_path() -> Path:
    """Path of the suffix-rule snapshot shipped with the package."""
    return Path(resources.files("phishkit.data") / "public_suffixes.dat")


def load_suffix_list(path: str | Path) -> SuffixList:
    """Parse a suffix-rule file.

    Blank lines and ``//`` comments are ignored. Raises SuffixListError if
    the file is unreadable or yields zero rules.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SuffixListError(f"cannot read suffix list {path}: {exc}") from exc

    plain: set[tuple[str, ...]] = set()
    wildcard: set[tuple[str, ...]] = set()
    exception: set[tuple[str, ...]] = set()
    for line in raw.splitlines():
        rule = line.strip()
        if not rule or rule.startswith("//"):
            continue
        rule = rule.split()[0].lower()
        if rule.startswith("!"):
            exception.add(tuple(rule[1:].split(".")))
        elif "*" in rule:
            wildcard.add(tuple(rule.split(".")))
        else:
            plain.add(tuple(rule.split(".")))

    total = len(plain) + len(wildcard) + len(exception)
    if total == 0:
        raise SuffixListError(f"zero suffix rules parsed from {path}")
    return SuffixList(
        plain=frozenset(plain),
        wildcard=frozenset(wildcard),
        exception=frozenset(exception),
        source_version=str(path),
    )


def _host_is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
        return True
    except ValueError:
        return False


def parse_url(url: str, suffixes: SuffixList) -> UrlParts:
    """Split `url` into its structural parts.

    The host is lowercased; userinfo and port are stripped before
    decomposition. Raises UrlParseError for a missing scheme, missing
    host, or a host with empty labels.
    """
    split = urlsplit(url)
    if not split.scheme:
        raise UrlParseError(f"URL has no scheme: {url!r}")
    try:
        host = split.hostname
    except ValueError as exc:
        raise UrlParseError(f"unusable host in {url!r}: {exc}") from exc
    if not host:
        raise UrlParseError(f"URL has no host: {url!r}")
    host = host.lower().rstrip(".")

    if _host_is_ip(host):
        return UrlParts(
            protocol=split.scheme.lower(),
            fqdn=host,
            subdomains="",
            rdn=host,
            mld="",
            ps="",
            path=split.path,
            query=split.query,
            is_ip=True,
            url=url,
        )

    labels = tuple(host.split("."))
    if any(not lab for lab in labels):
        raise UrlParseError(f"host has empty labels: {host!r}")

    ps_len = suffixes.suffix_length(labels)
    ps = ".".join(labels[len(labels) - ps_len :])
    if ps_len >= len(labels):
        # degenerate: the host itself is a public suffix (or single label)
        mld = ""
        rdn = host
        subdomains = ""
    else:
        mld = labels[len(labels) - ps_len - 1]
        rdn = f"{mld}.{ps}"
        subdomains = ".".join(labels[: len(labels) - ps_len - 1])

    return UrlParts(
        protocol=split.scheme.lower(),
        fqdn=host,
        subdomains=subdomains,
        rdn=rdn,
        mld=mld,
        ps=ps,
        path=split.path,
        query=split.query,
        is_ip=False,
        url=url,
    )


def count_level_domains(parts: UrlParts) -> int:
    """Number of dot-separated labels in the FQDN; 0 for IP hosts."""
    if parts.is_ip:
        return 0
    return len(parts.fqdn.split("."))
