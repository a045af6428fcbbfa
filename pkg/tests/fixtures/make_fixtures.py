"""Generate the bundled 200-doc / 5-topic fixture corpus.

Run from the repo root: python3 tests/fixtures/make_fixtures.py

The corpus mimics consumer-health search: per topic there are credible
prose documents (labeled relevant: topical AND credible), terse clickbait
documents (topical but not credible, labeled 0), and off-topic filler.
Credible docs share methodology vocabulary with the evidence articles so
their credibility scores come out higher; clickbait docs are shorter and
keyword-stuffed, which first-stage ranking tends to reward. Token sets are
kept disjoint across roles so the behavior of every pipeline stage on this
corpus is easy to reason about.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

HERE = Path(__file__).parent

TOPICS = [
    ("t1", "bcg vaccine tuberculosis protection"),
    ("t2", "vitamin supplements cold prevention"),
    ("t3", "garlic lowers blood pressure"),
    ("t4", "green tea weight loss"),
    ("t5", "honey treats seasonal allergies"),
]

HYPE = ["miracle", "secret", "cure", "instantly", "guaranteed", "shocking",
        "doctors", "hate", "exposed", "truth", "banned", "breakthrough"]

MARKERS = ["researchers", "participants", "dosage", "outcomes", "cohort",
           "baseline", "followup", "placebo"]

FILLER_POOLS = [
    "museum pottery medieval exhibits collection curator ceramics dynasty",
    "orchestra rehearsal symphony strings venue conductor premiere acoustics",
    "harbor lighthouse maritime shipping navigation buoy ferry tides",
    "chess openings endgame gambit tournament grandmaster notation clock",
    "volcano basalt magma geology sediment tectonic eruption crater",
    "bakery sourdough fermentation crust oven proofing crumb starter",
    "cinema projection reels archive restoration celluloid screening festival",
    "railway locomotive timetable platform signaling freight gauge junction",
    "apiary woodwork lathe chisel joinery varnish dovetail grain",
    "astronomy nebula telescope observatory eyepiece constellation meteor parallax",
]


def main() -> None:
    rng = random.Random(7)
    docs: list[dict] = []
    qrels: list[str] = []
    doc_no = 0

    def next_id() -> str:
        nonlocal doc_no
        doc_no += 1
        return f"d{doc_no:03d}"

    for topic_id, query in TOPICS:
        q = query.split()
        # credible prose: 2 short, 6 standard, all labeled relevant
        for _ in range(2):
            doc_id = next_id()
            docs.append({"doc_id": doc_id,
                         "text": f"the {' '.join(q)} is trial evidence"})
            qrels.append(f"{topic_id} 0 {doc_id} 1")
        for i in range(6):
            doc_id = next_id()
            marker = MARKERS[(i + doc_no) % len(MARKERS)]
            docs.append({"doc_id": doc_id,
                         "text": f"the {' '.join(q)} is of proven trial evidence {marker}"})
            qrels.append(f"{topic_id} 0 {doc_id} 1")
        # clickbait: 1 slicker page with function words, 11 terse keyword lists
        doc_id = next_id()
        hype = rng.sample(HYPE, 2)
        docs.append({"doc_id": doc_id,
                     "text": f"the {' '.join(q)} {hype[0]} of {hype[1]} is"})
        qrels.append(f"{topic_id} 0 {doc_id} 0")
        for _ in range(11):
            doc_id = next_id()
            hype = rng.sample(HYPE, 5)
            docs.append({"doc_id": doc_id,
                         "text": f"{' '.join(q)} {' '.join(hype)}"})
            qrels.append(f"{topic_id} 0 {doc_id} 0")
        # off-topic filler: never shares a query token, 3 of 20 are judged 0
        for j in range(20):
            doc_id = next_id()
            pool = FILLER_POOLS[(j + doc_no) % len(FILLER_POOLS)].split()
            words = rng.sample(pool, 6)
            docs.append({"doc_id": doc_id, "text": " ".join(words)})
            if j < 3:
                qrels.append(f"{topic_id} 0 {doc_id} 0")

    assert len(docs) == 200, len(docs)

    evidence: list[dict] = []
    art_no = 0
    for topic_id, query in TOPICS:
        q = query.split()
        for i in range(4):
            art_no += 1
            markers = " ".join(MARKERS[(i + k) % len(MARKERS)] for k in range(3))
            evidence.append({
                "article_id": f"e{art_no:02d}",
                "text": (f"a randomized controlled clinical trial of {' '.join(q)} "
                         f"is reported with {markers} and the study evidence"),
            })
    for i in range(5):
        art_no += 1
        pool = FILLER_POOLS[i].split()
        evidence.append({"article_id": f"e{art_no:02d}",
                         "text": "archival notes about " + " ".join(pool[:5])})

    with open(HERE / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")
    with open(HERE / "evidence.jsonl", "w", encoding="utf-8") as fh:
        for art in evidence:
            fh.write(json.dumps(art) + "\n")
    with open(HERE / "topics.jsonl", "w", encoding="utf-8") as fh:
        for topic_id, query in TOPICS:
            fh.write(json.dumps({"topic_id": topic_id, "text": query}) + "\n")
    with open(HERE / "qrels.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(qrels) + "\n")
    print(f"wrote {len(docs)} docs, {len(evidence)} evidence articles, "
          f"{len(qrels)} qrels lines")


if __name__ == "__main__":
    main()
