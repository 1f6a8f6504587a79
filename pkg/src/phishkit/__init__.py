"""Offline phishing-page detection toolkit.

Computes a 212-value lexical/structural representation of webpage
snapshots, classifies pages with gradient-boosted trees, and identifies
the brand a phishing page imitates via keyterm search.
"""

from .features import FEATURE_NAMES, AlexaRanks, FeatureVector, extract_features, load_alexa
from .gbm import GbmModel, TrainConfig, load_model, save_model, train
from .snapshot import LinkSplit, PageSnapshot, digest_html, load_snapshot, split_links
from .target_id import (
    FixtureSearchClient,
    KeytermList,
    TargetVerdict,
    identify_target,
    keyterms_boosted,
    keyterms_ocr,
    keyterms_prominent,
)
from .terms import TermDistribution, build_all_distributions, build_distribution, canonicalize, extract_terms, hellinger
from .urlparts import SuffixList, UrlParts, count_level_domains, load_suffix_list, parse_url

__version__ = "0.1.0"

__all__ = [
    "AlexaRanks",
    "FEATURE_NAMES",
    "FeatureVector",
    "FixtureSearchClient",
    "GbmModel",
    "KeytermList",
    "LinkSplit",
    "PageSnapshot",
    "SuffixList",
    "TargetVerdict",
    "TermDistribution",
    "TrainConfig",
    "UrlParts",
    "build_all_distributions",
    "build_distribution",
    "canonicalize",
    "count_level_domains",
    "digest_html",
    "extract_features",
    "extract_terms",
    "hellinger",
    "identify_target",
    "keyterms_boosted",
    "keyterms_ocr",
    "keyterms_prominent",
    "load_alexa",
    "load_model",
    "load_snapshot",
    "load_suffix_list",
    "parse_url",
    "save_model",
    "split_links",
    "train",
]
