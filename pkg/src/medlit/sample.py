"""Deterministic synthetic corpus for demos and end-to-end checks.

Abstract templates weave gazetteer terms, parenthesized abbreviations and
negation phrasing so the local extractor has something real to chew on.
The same seed always produces the same CSV bytes.
"""

from __future__ import annotations

import csv
import io
import random

_TEMPLATES = [
    "Treatment with {drug_a} ({abbr_a}) was evaluated in patients with COVID-19. "
    "The combination of {drug_a} and {drug_b} showed measurable effects.",
    "We report outcomes for {drug_b} therapy. COVID-19 diagnosis did not occur in the "
    "control group, and no adverse response to {drug_a} was recorded.",
    "A randomized trial compared {drug_a} with {drug_b} in severe COVID-19. "
    "Patients never received {drug_c} during the study window.",
    "Early administration of {drug_a} ({abbr_a}) and {drug_b} reduced symptom duration. "
    "Laboratory markers were negative for secondary infection.",
    "This review summarizes evidence on {drug_a}, {drug_b}, and {drug_c} for COVID-19, "
    "including dosing and safety considerations.",
    "In vitro screening identified {drug_a} as a candidate inhibitor. Clinical use of "
    "{drug_b} without prior screening is not recommended.",
]

_DRUGS = [
    ("hydroxychloroquine", "HCQ"),
    ("chloroquine", "CQ"),
    ("remdesivir", None),
    ("azithromycin", None),
    ("Tocilizumab", None),
    ("lopinavir", None),
    ("ritonavir", None),
    ("dexamethasone", None),
    ("favipiravir", None),
    ("heparin", None),
    ("vitamin D", None),
    ("insulin", None),
]

_JOURNALS = ["J Virol", "Lancet", "Clin Infect Dis", "BMJ Open", None]


def synthetic_records(n: int = 50, seed: int = 7) -> list[dict]:
    """Row dicts for a synthetic metadata CSV with n data rows."""
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        template = _TEMPLATES[i % len(_TEMPLATES)]
        drug_a, abbr_a = _DRUGS[rng.randrange(len(_DRUGS))]
        drug_b, _ = _DRUGS[rng.randrange(len(_DRUGS))]
        drug_c, _ = _DRUGS[rng.randrange(len(_DRUGS))]
        abstract = template.format(
            drug_a=drug_a,
            abbr_a=abbr_a or drug_a.upper()[:3],
            drug_b=drug_b,
            drug_c=drug_c,
        )
        # A few rows exercise the awkward metadata shapes: empty abstracts,
        # year-only dates, missing dates.
        if i % 17 == 13:
            abstract = ""
        if i % 11 == 7:
            publish_time = "2020"
        elif i % 13 == 9:
            publish_time = ""
        else:
            month = 1 + (i % 12)
            day = 1 + (i * 3) % 28
            publish_time = f"2020-{month:02d}-{day:02d}"
        rows.append(
            {
                "cord_uid": f"syn{i:04d}",
                "title": f"Synthetic study {i}: {drug_a} and {drug_b}",
                "journal": _JOURNALS[i % len(_JOURNALS)] or "",
                "authors": f"Author {i}; Coauthor {i}",
                "abstract": abstract,
                "publish_time": publish_time,
                "doi": f"10.1000/syn.{i:04d}",
            }
        )
    return rows


def synthetic_metadata_csv(n: int = 50, seed: int = 7) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=["cord_uid", "title", "journal", "authors", "abstract", "publish_time", "doi"],
    )
    writer.writeheader()
    for row in synthetic_records(n, seed):
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def write_synthetic_corpus(path, n: int = 50, seed: int = 7) -> None:
    with open(path, "wb") as fh:
        fh.write(synthetic_metadata_csv(n, seed))
