import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phishkit.snapshot import (
    MalformedSnapshot,
    PageSnapshot,
    digest_html,
    load_snapshot,
    split_links,
)


def write_snap(tmp_path, doc, name="page.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# ----------------------------------------------------------------- loading

def test_minimal_snapshot(tmp_path, suffixes):
    path = write_snap(
        tmp_path, {"starting_url": "http://a.com", "landing_url": "http://a.com"}
    )
    snap = load_snapshot(path, suffixes)
    assert snap.redirection_chain == ("http://a.com",)
    assert snap.text == "" and snap.logged_links == ()


def test_raw_html_is_digested(tmp_path, suffixes):
    doc = {
        "starting_url": "http://a.com",
        "landing_url": "http://a.com",
        "raw_html": "<title>Pay</title><body>hi <a href='http://b.com'>x</a></body>",
    }
    snap = load_snapshot(write_snap(tmp_path, doc), suffixes)
    assert snap.title == "Pay"
    assert snap.text == "hi x"
    assert snap.href_links == ("http://b.com",)


def test_explicit_fields_beat_raw_html(tmp_path, suffixes):
    doc = {
        "starting_url": "http://a.com",
        "landing_url": "http://a.com",
        "title": "Explicit",
        "raw_html": "<title>FromHtml</title><body>hello body</body>",
    }
    snap = load_snapshot(write_snap(tmp_path, doc), suffixes)
    assert snap.title == "Explicit"
    assert snap.text == "hello body"  # absent field still digested


def test_missing_landing_url_rejected(tmp_path, suffixes):
    path = write_snap(tmp_path, {"starting_url": "http://a.com"})
    with pytest.raises(MalformedSnapshot):
        load_snapshot(path, suffixes)


def test_unparseable_starting_url_rejected(tmp_path, suffixes):
    path = write_snap(
        tmp_path, {"starting_url": "nohost", "landing_url": "http://a.com"}
    )
    with pytest.raises(MalformedSnapshot):
        load_snapshot(path, suffixes)


def test_inconsistent_chain_rejected(tmp_path, suffixes):
    doc = {
        "starting_url": "http://a.com",
        "landing_url": "http://b.com",
        "redirection_chain": ["http://a.com"],
    }
    with pytest.raises(MalformedSnapshot):
        load_snapshot(write_snap(tmp_path, doc), suffixes)


def test_invalid_json_rejected(tmp_path, suffixes):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(MalformedSnapshot):
        load_snapshot(path, suffixes)


def test_negative_count_rejected(tmp_path, suffixes):
    doc = {
        "starting_url": "http://a.com",
        "landing_url": "http://a.com",
        "input_count": -1,
    }
    with pytest.raises(MalformedSnapshot):
        load_snapshot(write_snap(tmp_path, doc), suffixes)


# --------------------------------------------------------------- digestion

def test_copyright_symbol_line():
    digest = digest_html("<body>© 2015 Examplecorp</body>", "http://a.com")
    assert digest.copyright == "© 2015 Examplecorp"


def test_copyright_word_line():
    html = "<body>welcome\nCopyright 2015 Acme Ltd\nbye</body>"
    digest = digest_html(html, "http://a.com")
    assert digest.copyright == "Copyright 2015 Acme Ltd"


def test_no_copyright():
    assert digest_html("<body>plain text</body>", "http://a.com").copyright == ""


def test_element_counts():
    digest = digest_html(
        "<body><input/><input/><img/><iframe/></body>", "http://a.com"
    )
    assert (digest.input_count, digest.image_count, digest.iframe_count) == (2, 1, 1)


def test_relative_href_absolutized():
    digest = digest_html("<body><a href='/ap/x'>y</a></body>", "http://a.com")
    assert digest.href_links == ["http://a.com/ap/x"]


def test_scripts_and_styles_excluded():
    html = (
        "<body>keep "
        "<script>var hidden = 1;</script>"
        "<style>.x{color:red}</style>"
        "also</body>"
    )
    assert digest_html(html, "http://a.com").text == "keep also"


def test_inline_iframe_srcdoc_digested():
    html = (
        "<body>outer"
        "<iframe srcdoc=\"<body>inner <a href='http://c.com/z'>l</a><input/></body>\">"
        "</iframe></body>"
    )
    digest = digest_html(html, "http://a.com")
    assert "inner" in digest.text and "outer" in digest.text
    assert "http://c.com/z" in digest.href_links
    assert digest.iframe_count == 1
    assert digest.input_count == 1


def test_entities_decoded():
    digest = digest_html("<body>&copy; 2015 Acme</body>", "http://a.com")
    assert digest.copyright.startswith("©")


@given(st.text(max_size=300))
@settings(max_examples=200, deadline=None)
def test_digest_never_raises(blob):
    digest_html(blob, "http://a.com")


# ------------------------------------------------------------------- split

def test_split_by_chain_rdn(suffixes):
    snap = PageSnapshot(
        starting_url="http://a.com",
        landing_url="http://a.com",
        redirection_chain=("http://a.com",),
        logged_links=("http://x.a.com/i.png", "http://cdn.b.com/j.js"),
    )
    split = split_links(snap, suffixes)
    assert split.internal_logged == ("http://x.a.com/i.png",)
    assert split.external_logged == ("http://cdn.b.com/j.js",)
    assert split.internal_rdns == {"a.com"}


def test_chain_traversal_extends_internal_set(suffixes):
    snap = PageSnapshot(
        starting_url="http://a.com",
        landing_url="http://b.com",
        redirection_chain=("http://a.com", "http://b.com"),
        href_links=("http://b.com/p",),
    )
    split = split_links(snap, suffixes)
    assert split.internal_href == ("http://b.com/p",)
    assert split.internal_rdns == {"a.com", "b.com"}


def test_no_links(suffixes):
    snap = PageSnapshot(
        starting_url="http://a.com",
        landing_url="http://a.com",
        redirection_chain=("http://a.com",),
    )
    split = split_links(snap, suffixes)
    assert split.internal_logged == split.external_logged == ()
    assert split.internal_href == split.external_href == ()


def test_partition_property(suffixes, snapshots):
    for snap in snapshots.values():
        split = split_links(snap, suffixes)
        n_logged = len(split.internal_logged) + len(split.external_logged)
        n_href = len(split.internal_href) + len(split.external_href)
        total = len(snap.logged_links) + len(snap.href_links)
        assert n_logged + n_href + split.dropped == total


def test_unparseable_links_dropped_with_count(suffixes):
    snap = PageSnapshot(
        starting_url="http://a.com",
        landing_url="http://a.com",
        redirection_chain=("http://a.com",),
        logged_links=("http://a.com/ok", "not a url", "mailto:x@y.com"),
    )
    split = split_links(snap, suffixes)
    assert split.internal_logged == ("http://a.com/ok",)
    assert split.dropped == 2


def test_split_deterministic(tmp_path, suffixes, corpus_dir):
    name = "phish_securebank.json"
    a = load_snapshot(corpus_dir / name, suffixes)
    b = load_snapshot(corpus_dir / name, suffixes)
    assert a == b
    assert split_links(a, suffixes) == split_links(b, suffixes)
