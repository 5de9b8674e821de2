"""Synthetic interview corpus generator.

Produces transcript TSVs, per-split label CSVs, and a ground-truth manifest
in exactly the formats the ingest pipeline consumes. Depressed sessions draw
from a planted depressed vocabulary (never used by non-depressed sessions,
which guarantees those words a negative Word Score) and use first-person
pronouns at an elevated rate; non-depressed sessions get a mirrored planted
positive vocabulary. Everything is a pure function of the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import PHQ_DEPRESSED_THRESHOLD

FIRST_SESSION_ID = 300

# Disjoint word pools. Planted words appear only in their class's sessions.
DEPRESSED_WORDS = (
    "hopeless", "numb", "exhausted", "insomnia", "worthless", "empty",
    "crying", "ashamed", "drained", "miserable", "anxious", "gloomy",
    "dread", "hollow", "restless", "aching", "overwhelmed", "trapped",
    "tearful", "sleepless", "despair", "burdened", "lifeless", "suffocating",
)

POSITIVE_WORDS = (
    "cheerful", "thriving", "grateful", "energized", "hopeful", "sunny",
    "upbeat", "refreshed", "motivated", "joyful", "contented", "optimistic",
    "proud", "relaxed", "playful", "vibrant",
)

NEUTRAL_WORDS = (
    "work", "school", "coffee", "morning", "weekend", "family", "friends",
    "dinner", "music", "movie", "garden", "kitchen", "travel", "summer",
    "winter", "city", "neighborhood", "apartment", "driving", "walking",
    "reading", "cooking", "shopping", "meeting", "project", "computer",
    "phone", "television", "weather", "holiday", "birthday", "brother",
    "sister", "mother", "father", "cousin", "college", "classes", "homework",
    "office", "manager", "customer", "store", "market", "bicycle", "train",
    "airport", "beach", "mountain", "river", "park", "playground", "library",
    "museum", "concert", "festival", "game", "team", "practice", "coach",
    "doctor", "dentist", "appointment", "insurance", "paperwork", "laundry",
    "cleaning", "repair", "painting", "photography", "camping", "fishing",
    "running", "swimming", "yoga", "gym", "breakfast", "lunch", "snack",
    "recipe", "restaurant", "neighbor", "landlord", "roommate", "puppy",
    "kitten", "aquarium", "plants", "balcony", "furniture", "decorating",
    "budget", "savings", "vacation", "ticket", "luggage", "hotel", "road",
    "highway", "traffic", "parking", "engine", "radio", "podcast", "novel",
    "magazine", "newspaper", "article", "keyboard", "screen", "software",
    "meeting", "deadline", "presentation", "colleague", "interview",
    "resume", "career", "retirement", "hobby", "puzzle", "chess", "cards",
    "picnic", "barbecue", "soccer", "baseball", "basketball", "tennis",
)

FILLER_WORDS = (
    "the", "and", "was", "it", "so", "just", "really", "that", "have",
    "been", "like", "about", "some", "there", "when", "then", "well",
)

PRONOUNS = ("i", "me", "my", "myself", "mine")
PRONOUN_WEIGHTS = (0.5, 0.15, 0.2, 0.1, 0.05)

QUESTIONS = (
    "how are you doing today",
    "where are you from originally",
    "tell me about your week",
    "what do you do to relax",
    "how have you been sleeping lately",
    "what did you study in school",
    "tell me about your family",
    "what do you enjoy doing on weekends",
    "how is work going for you",
    "what was the last trip you took",
    "tell me about your friends",
    "what makes a good day for you",
)

BACKCHANNELS = ("that's good", "okay", "i see", "mhm")


@dataclass(frozen=True)
class SessionPlan:
    session_id: int
    split: str  # train | dev | test
    phq8: int
    has_interviewer: bool

    @property
    def depressed(self) -> bool:
        return self.phq8 >= PHQ_DEPRESSED_THRESHOLD


def _split_sizes(n_sessions: int) -> dict[str, int]:
    train = max(1, round(n_sessions * 107 / 189))
    dev = max(1, round(n_sessions * 35 / 189))
    test = max(1, n_sessions - train - dev)
    return {"train": train, "dev": dev, "test": test}


def plan_sessions(
    rng: np.random.Generator, n_sessions: int, depressed_ratio: float
) -> list[SessionPlan]:
    """Exact per-split class counts, severity spread over the full PHQ range."""
    sizes = _split_sizes(n_sessions)
    plans: list[SessionPlan] = []
    next_id = FIRST_SESSION_ID
    for split in ("train", "dev", "test"):
        size = sizes[split]
        n_dep = min(size - 1, max(1, round(size * depressed_ratio)))
        labels = [True] * n_dep + [False] * (size - n_dep)
        rng.shuffle(labels)
        for depressed in labels:
            if depressed:
                phq = int(rng.integers(PHQ_DEPRESSED_THRESHOLD, 25))
            else:
                phq = int(rng.integers(0, PHQ_DEPRESSED_THRESHOLD))
            plans.append(SessionPlan(next_id, split, phq, has_interviewer=True))
            next_id += 1
    # A few sessions lack interviewer rows, mirroring re-segmented recordings.
    if len(plans) >= 12:
        no_ellie = {5, len(plans) // 2, len(plans) - 4}
        plans = [
            SessionPlan(p.session_id, p.split, p.phq8, has_interviewer=(i not in no_ellie))
            for i, p in enumerate(plans)
        ]
    return plans


def _sample_word(rng: np.random.Generator, plan: SessionPlan) -> str:
    severity = (plan.phq8 - PHQ_DEPRESSED_THRESHOLD) / 14 if plan.depressed else 0.0
    roll = rng.random()
    if plan.depressed:
        planted_rate = 0.16 + 0.10 * severity
        pronoun_rate = 0.20
        planted_pool = DEPRESSED_WORDS
    else:
        planted_rate = 0.10
        pronoun_rate = 0.05
        planted_pool = POSITIVE_WORDS
    if roll < planted_rate:
        return planted_pool[int(rng.integers(0, len(planted_pool)))]
    if roll < planted_rate + pronoun_rate:
        return PRONOUNS[int(rng.choice(len(PRONOUNS), p=PRONOUN_WEIGHTS))]
    if roll < planted_rate + pronoun_rate + 0.18:
        return FILLER_WORDS[int(rng.integers(0, len(FILLER_WORDS)))]
    return NEUTRAL_WORDS[int(rng.integers(0, len(NEUTRAL_WORDS)))]


def _answer(rng: np.random.Generator, plan: SessionPlan, force_word: str | None = None) -> str:
    words = [_sample_word(rng, plan) for _ in range(int(rng.integers(6, 19)))]
    if force_word is not None:
        words[int(rng.integers(0, len(words)))] = force_word
    return " ".join(words)


def _session_rows(
    rng: np.random.Generator, plan: SessionPlan, force_words: list[str]
) -> list[tuple[float, float, str, str]]:
    rows: list[tuple[float, float, str, str]] = []
    clock = float(rng.uniform(20.0, 40.0))
    queue = list(force_words)
    for _ in range(int(rng.integers(10, 17))):
        if plan.has_interviewer:
            question = QUESTIONS[int(rng.integers(0, len(QUESTIONS)))]
            dur = float(rng.uniform(1.5, 4.0))
            rows.append((clock, clock + dur, "Ellie", question))
            clock += dur + float(rng.uniform(0.2, 1.0))
            if rng.random() < 0.15:
                bc = BACKCHANNELS[int(rng.integers(0, len(BACKCHANNELS)))]
                dur = float(rng.uniform(0.4, 1.0))
                rows.append((clock, clock + dur, "Ellie", bc))
                clock += dur + float(rng.uniform(0.2, 0.6))
        for _ in range(int(rng.integers(1, 4))):
            if rng.random() < 0.02:
                dur = float(rng.uniform(0.3, 0.8))
                rows.append((clock, clock + dur, "Participant", "  "))
                clock += dur + float(rng.uniform(0.2, 0.6))
                continue
            text = _answer(rng, plan, queue.pop(0) if queue else None)
            dur = float(rng.uniform(2.0, 7.0))
            rows.append((clock, clock + dur, "Participant", text))
            clock += dur + float(rng.uniform(0.3, 1.2))
    # Planted words that did not fit get one closing answer each.
    for word in queue:
        dur = float(rng.uniform(2.0, 7.0))
        rows.append((clock, clock + dur, "Participant", _answer(rng, plan, word)))
        clock += dur + float(rng.uniform(0.3, 1.2))
    return rows


def generate_corpus(
    out_dir: str | Path,
    seed: int,
    n_sessions: int = 189,
    depressed_ratio: float = 0.30,
) -> dict:
    """Write transcripts/, labels CSVs, and manifest.json; return the manifest.

    Every planted word is force-injected into at least one session of its
    class, so the WS sign guarantees hold for the whole planted vocabulary.
    """
    out = Path(out_dir)
    transcripts = out / "transcripts"
    transcripts.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    plans = plan_sessions(rng, n_sessions, depressed_ratio)
    dep_plans = [p for p in plans if p.depressed]
    pos_plans = [p for p in plans if not p.depressed]
    # Round-robin every planted word into a session of its class so each one
    # is guaranteed to appear in the corpus at least once.
    forced: dict[int, list[str]] = {}
    for i, word in enumerate(DEPRESSED_WORDS):
        forced.setdefault(dep_plans[i % len(dep_plans)].session_id, []).append(word)
    for i, word in enumerate(POSITIVE_WORDS):
        forced.setdefault(pos_plans[i % len(pos_plans)].session_id, []).append(word)

    for plan in plans:
        rows = _session_rows(rng, plan, forced.get(plan.session_id, []))
        path = transcripts / f"{plan.session_id}_TRANSCRIPT.tsv"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("start_time\tstop_time\tspeaker\tvalue\n")
            for start, stop, speaker, value in rows:
                fh.write(f"{start:.4f}\t{stop:.4f}\t{speaker}\t{value}\n")

    for split in ("train", "dev", "test"):
        with (out / f"labels_{split}.csv").open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("Participant_ID,PHQ8_Binary,PHQ8_Score\n")
            for plan in plans:
                if plan.split == split:
                    fh.write(f"{plan.session_id},{int(plan.depressed)},{plan.phq8}\n")

    counts = {
        split: {
            "depressed": sum(1 for p in plans if p.split == split and p.depressed),
            "not_depressed": sum(1 for p in plans if p.split == split and not p.depressed),
        }
        for split in ("train", "dev", "test")
    }
    manifest = {
        "seed": seed,
        "n_sessions": n_sessions,
        "depressed_ratio_target": depressed_ratio,
        "counts": counts,
        "planted_depressed_words": list(DEPRESSED_WORDS),
        "planted_positive_words": list(POSITIVE_WORDS),
        "sessions": [
            {
                "id": p.session_id,
                "split": p.split,
                "phq8": p.phq8,
                "depressed": p.depressed,
                "has_interviewer": p.has_interviewer,
            }
            for p in plans
        ],
    }
    with (out / "manifest.json").open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
