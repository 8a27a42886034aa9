"""Deterministic synthetic corpora for desk-scale experiments.

Generates topic-classification (4-class, news-shaped, 3-column CSV) and
sentiment (2-class, review-shaped, 2-column CSV) datasets whose class
signal lives in overlapping content-word distributions. Raw rows carry
capitalization, digits, and punctuation so ingestion exercises the full
normalization path. Everything is a pure function of the seed.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .data import DatasetSpec

FILLER = (
    "the and of to in that it is was for on are with as his they at be this from "
    "have or by one had not but what all were when we there can an your which their "
    "said if do will each about how up out them then she many some so these would "
    "other into has more her two like him see time could no make than first been "
    "its who now people my made over did down only way find use may long little "
    "very after word called just where most know get through back much before also "
    "around another came come work three must because does part even place well "
    "such here take why things great help put years different away again off went "
    "old number tell men say small every found still between name should home big "
    "give air line set own under read last never us left end along while might "
    "next sound below saw something thought both few those always looked show "
    "large often together asked house world going want school important until form "
    "food keep children feet land side without boy once animal life enough took "
    "sometimes four head above kind began almost live page got earth need far hand "
    "high year mother light country father let night picture being study second "
    "soon story since white ever paper hard near sentence better best across "
    "during today however sure knew try told young sun thing whole hear example "
    "heard several change answer room sea against top turned learn point city play "
    "toward five himself usually money seen car morning given"
).split()

TOPIC_LEXICONS = {
    1: (
        "government minister election parliament treaty border embassy diplomat "
        "president summit sanctions protest refugee ceasefire coalition senate "
        "congress policy regime corruption uprising militia conflict negotiation "
        "ambassador federal constitution ballot referendum asylum frontier "
        "sovereignty legislation tribunal delegation insurgency peacekeeping "
        "diplomacy capital premier cabinet envoy accord crisis troops sanction "
        "deputy succession mandate decree judiciary"
    ).split(),
    2: (
        "coach stadium playoff tournament championship league goal striker "
        "quarterback inning marathon sprint relay medal olympics referee penalty "
        "fixture standings season roster trophy finals derby batting bowler wicket "
        "touchdown homer dunk volley racket podium qualifier semifinal decathlon "
        "keeper defender midfielder forward pitcher catcher umpire slugger champ "
        "arena scoreboard halftime overtime varsity"
    ).split(),
    3: (
        "market shares profit revenue merger acquisition stocks investor dividend "
        "earnings quarterly banking currency inflation tariff exports retail "
        "venture portfolio hedge trading commodity futures economy recession "
        "stimulus bailout shareholder brokerage bankruptcy takeover valuation "
        "deficit surplus auditor lender creditor debtor insurer monopoly cartel "
        "payroll pension invoice ledger commerce wholesale broker"
    ).split(),
    4: (
        "software computer satellite rocket quantum browser robot processor "
        "algorithm network internet gadget telescope genome laser silicon server "
        "database encryption wireless broadband chipset firmware spacecraft orbit "
        "probe reactor nanotech biotech prototype circuit sensor android download "
        "upload malware hacker pixel modem router kernel compiler bandwidth "
        "antenna microscope particle fusion"
    ).split(),
}

POSITIVE = (
    "wonderful brilliant delightful superb charming moving masterful gripping "
    "heartfelt dazzling luminous tender witty inventive exhilarating graceful "
    "riveting sublime joyous triumphant captivating refreshing stunning enchanting "
    "vibrant affecting rewarding polished soulful breathtaking absorbing elegant "
    "crisp generous profound radiant nimble spirited lovely immersive resonant "
    "magnetic assured endearing exquisite buoyant poignant shimmering deft warm "
    "satisfying irresistible magnificent glorious splendid uplifting"
).split()

NEGATIVE = (
    "terrible boring dreadful tedious clumsy hollow shallow bland lifeless muddled "
    "sloppy grating dismal stale contrived forgettable wooden plodding incoherent "
    "laughable overwrought listless murky irritating pointless dreary leaden "
    "labored soggy disjointed lumbering trite vapid insipid limp aimless flat "
    "clunky strained tiresome witless joyless airless shapeless lazy numbing "
    "charmless flimsy garbled drab lifedraining turgid stilted monotonous dire"
).split()

REVIEW_FILLER = (
    "film movie story plot director actor screen scene script character "
    "performance dialogue camera ending cast drama comedy thriller documentary "
    "footage narrative audience cinema picture role portrayal pacing visuals "
    "soundtrack premise genre adaptation lead supporting finale montage closeup "
    "subplot casting"
).split()

SENTIMENT_LEXICONS = {1: NEGATIVE, 2: POSITIVE}


def _decorate(words: list[str], rng: np.random.Generator) -> str:
    """Re-dress clean words with caps, commas, and stray digits."""
    out = []
    for i, w in enumerate(words):
        r = rng.random()
        if i == 0 or r < 0.04:
            w = w.capitalize()
        elif r < 0.06:
            w = w.upper()
        if rng.random() < 0.05 and i + 1 < len(words):
            w += ","
        if rng.random() < 0.02:
            w += str(rng.integers(0, 100))
        out.append(w)
    return " ".join(out) + ("." if rng.random() < 0.8 else "!")


def _content_sentence(
    rng: np.random.Generator,
    label: int,
    lexicons: dict[int, list[str]],
    filler: list[str],
    length: int,
    content_rate: float,
    confusion: float,
) -> list[str]:
    labels = sorted(lexicons)
    words = []
    for _ in range(length):
        if rng.random() < content_rate:
            src = label
            if rng.random() < confusion:
                others = [c for c in labels if c != label]
                src = others[rng.integers(0, len(others))]
            lex = lexicons[src]
            words.append(lex[rng.integers(0, len(lex))])
        else:
            words.append(filler[rng.integers(0, len(filler))])
    return words


def generate_topic_corpus(
    out_dir: str | Path,
    train_count: int = 120000,
    test_count: int = 7600,
    seed: int = 0,
    name: str = "ag_synth",
    content_rate: float = 0.22,
    confusion: float = 0.12,
) -> DatasetSpec:
    """4-class news-shaped corpus in 3-column (label,title,description) CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    spec = DatasetSpec(
        name=name,
        train_path=str(out / f"{name}.train.csv"),
        test_path=str(out / f"{name}.test.csv"),
        classes=4,
        n=49,
        m=18,
        format="csv3",
    )
    for path, count in ((spec.train_path, train_count), (spec.test_path, test_count)):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            for _ in range(count):
                label = int(rng.integers(1, 5))
                title = _content_sentence(
                    rng, label, TOPIC_LEXICONS, FILLER,
                    int(rng.integers(3, 8)), min(1.0, content_rate * 2), confusion,
                )
                desc = _content_sentence(
                    rng, label, TOPIC_LEXICONS, FILLER,
                    int(rng.integers(18, 40)), content_rate, confusion,
                )
                writer.writerow([label, _decorate(title, rng), _decorate(desc, rng)])
    return spec


def generate_sentiment_corpus(
    out_dir: str | Path,
    train_count: int = 10235,
    test_count: int = 427,
    seed: int = 0,
    name: str = "mr_synth",
    content_rate: float = 0.20,
    confusion: float = 0.15,
) -> DatasetSpec:
    """2-class review-shaped corpus in 2-column (label,text) CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    filler = FILLER + REVIEW_FILLER
    spec = DatasetSpec(
        name=name,
        train_path=str(out / f"{name}.train.csv"),
        test_path=str(out / f"{name}.test.csv"),
        classes=2,
        n=51,
        m=18,
        format="csv2",
    )
    for path, count in ((spec.train_path, train_count), (spec.test_path, test_count)):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            for _ in range(count):
                label = int(rng.integers(1, 3))
                words = _content_sentence(
                    rng, label, SENTIMENT_LEXICONS, filler,
                    int(rng.integers(8, 44)), content_rate, confusion,
                )
                writer.writerow([label, _decorate(words, rng)])
    return spec
