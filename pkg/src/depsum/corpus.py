"""Transcript and label ingestion.

Transcripts arrive as UTF-8 TSV (``start_time\\tstop_time\\tspeaker\\tvalue``),
labels as CSV (``Participant_ID,PHQ8_Binary,PHQ8_Score``). Interviewer turns
are dropped, each maximal run of consecutive participant turns becomes one
sentence, and sentences are kept verbatim (no lowercasing) -- normalization
is the tokenizer's job.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import IO, Iterable, Mapping

from .errors import DuplicateIdError, LabelMismatchError, MalformedRowError, UnknownSpeakerError

PHQ_DEPRESSED_THRESHOLD = 10

TRANSCRIPT_HEADER = ("start_time", "stop_time", "speaker", "value")


class Speaker(Enum):
    INTERVIEWER = "interviewer"
    PARTICIPANT = "participant"


class Label(IntEnum):
    """Binary depression label; the integer value is the classifier class index."""

    NOT_DEPRESSED = 0
    DEPRESSED = 1


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


@dataclass(frozen=True)
class Turn:
    start_time: float
    stop_time: float
    speaker: Speaker
    text: str


@dataclass(frozen=True)
class SessionMeta:
    session_id: int
    phq8_score: int | None
    binary_label: Label
    split: Split


@dataclass(frozen=True)
class Document:
    session_id: int
    sentences: tuple[str, ...]

    @property
    def full_text(self) -> str:
        return " ".join(self.sentences)


def label_from_score(phq8_score: int) -> Label:
    return Label.DEPRESSED if phq8_score >= PHQ_DEPRESSED_THRESHOLD else Label.NOT_DEPRESSED


_SPEAKER_MAP = {"Ellie": Speaker.INTERVIEWER, "Participant": Speaker.PARTICIPANT}


def parse_transcript(stream: Iterable[str]) -> list[Turn]:
    """Parse a transcript TSV into turns, in file order.

    Whitespace-only participant rows carry no lexical content and are dropped
    here; interviewer rows are kept even when empty because they still break
    participant runs in :func:`merge_turns`.
    """
    lines = iter(stream)
    try:
        header = next(lines)
    except StopIteration:
        raise MalformedRowError("transcript stream is empty (missing header)")
    if tuple(h.strip() for h in header.rstrip("\n\r").split("\t")) != TRANSCRIPT_HEADER:
        raise MalformedRowError(f"unexpected transcript header: {header.strip()!r}")

    turns: list[Turn] = []
    for lineno, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise MalformedRowError(f"line {lineno}: expected 4 columns, got {len(fields)}")
        start_s, stop_s, speaker_s, value = fields
        try:
            start, stop = float(start_s), float(stop_s)
        except ValueError:
            raise MalformedRowError(f"line {lineno}: unparseable time {start_s!r}/{stop_s!r}")
        if stop < start:
            raise MalformedRowError(f"line {lineno}: stop_time {stop} before start_time {start}")
        speaker = _SPEAKER_MAP.get(speaker_s.strip())
        if speaker is None:
            raise UnknownSpeakerError(f"line {lineno}: unknown speaker {speaker_s.strip()!r}")
        text = value.strip()
        if speaker is Speaker.PARTICIPANT and not text:
            continue
        turns.append(Turn(start, stop, speaker, text))
    return turns


def merge_turns(turns: Iterable[Turn]) -> list[str]:
    """Collapse each maximal run of consecutive participant turns into one sentence.

    Interviewer turns are discarded but still delimit runs. A session with no
    interviewer turns at all (re-segmented recordings) keeps each participant
    turn as its own sentence, preserving the original answer boundaries.
    """
    turns = list(turns)
    if turns and not any(t.speaker is Speaker.INTERVIEWER for t in turns):
        return [t.text for t in turns]
    sentences: list[str] = []
    run: list[str] = []
    for turn in turns:
        if turn.speaker is Speaker.PARTICIPANT:
            run.append(turn.text)
        elif run:
            sentences.append(" ".join(run))
            run = []
    if run:
        sentences.append(" ".join(run))
    return sentences


def build_document(session_id: int, turns: Iterable[Turn]) -> Document:
    return Document(session_id=session_id, sentences=tuple(merge_turns(turns)))


def load_labels(stream: Iterable[str], split: Split) -> dict[int, SessionMeta]:
    """Read a label CSV for one split.

    When PHQ8_Score is present the binary label is recomputed from the >= 10
    threshold and cross-checked against PHQ8_Binary; when the column is
    missing or empty (allowed for the test split) the binary column stands
    alone and the score is stored as None.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise MalformedRowError("label stream is empty (missing header)")
    fields = [f.strip() for f in reader.fieldnames]
    for required in ("Participant_ID", "PHQ8_Binary"):
        if required not in fields:
            raise MalformedRowError(f"label header missing column {required!r}")

    sessions: dict[int, SessionMeta] = {}
    for row in reader:
        row = {(k.strip() if k else k): v for k, v in row.items()}
        try:
            session_id = int(row["Participant_ID"])
            binary = int(row["PHQ8_Binary"])
        except (TypeError, ValueError, KeyError):
            raise MalformedRowError(f"unparseable label row: {row!r}")
        if binary not in (0, 1):
            raise MalformedRowError(f"PHQ8_Binary must be 0 or 1, got {binary!r}")
        if session_id in sessions:
            raise DuplicateIdError(f"duplicate session id {session_id}")

        score_raw = (row.get("PHQ8_Score") or "").strip()
        if score_raw:
            try:
                score: int | None = int(score_raw)
            except ValueError:
                raise MalformedRowError(f"unparseable PHQ8_Score {score_raw!r}")
            label = label_from_score(score)
            if label.value != binary:
                raise LabelMismatchError(
                    f"session {session_id}: PHQ8_Binary={binary} contradicts PHQ8_Score={score}"
                )
        else:
            score = None
            label = Label(binary)
        sessions[session_id] = SessionMeta(session_id, score, label, split)
    return sessions


@dataclass(frozen=True)
class ClassCounts:
    depressed: int = 0
    not_depressed: int = 0

    @property
    def total(self) -> int:
        return self.depressed + self.not_depressed

    @property
    def depressed_ratio(self) -> float:
        return self.depressed / self.total if self.total else 0.0


def class_distribution(sessions: Iterable[SessionMeta]) -> dict[Split, ClassCounts]:
    """Exact depressed / not-depressed counts per split."""
    dep = {split: 0 for split in Split}
    nondep = {split: 0 for split in Split}
    for meta in sessions:
        if meta.binary_label is Label.DEPRESSED:
            dep[meta.split] += 1
        else:
            nondep[meta.split] += 1
    return {split: ClassCounts(dep[split], nondep[split]) for split in Split}


# documents JSONL export: {"id": int, "sentences": [str], "phq8": int|null, "split": str}

def write_documents(
    out: IO[str], documents: Iterable[Document], meta: Mapping[int, SessionMeta]
) -> int:
    """Write documents as JSON Lines, sorted by session id. Returns line count."""
    count = 0
    for doc in sorted(documents, key=lambda d: d.session_id):
        m = meta[doc.session_id]
        record = {
            "id": doc.session_id,
            "sentences": list(doc.sentences),
            "phq8": m.phq8_score,
            "split": m.split.value,
        }
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
        count += 1
    return count


def read_documents(stream: Iterable[str]) -> list[tuple[Document, SessionMeta]]:
    """Read a documents JSONL stream back into (Document, SessionMeta) pairs.

    Records with a null phq8 take their label from the score-less convention:
    they are exported only for unscored sessions, so the label defaults to
    NOT_DEPRESSED and downstream training/eval skips them.
    """
    pairs: list[tuple[Document, SessionMeta]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            doc = Document(int(record["id"]), tuple(str(s) for s in record["sentences"]))
            split = Split(record["split"])
            phq8 = record["phq8"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise MalformedRowError(f"documents line {lineno} is not a valid record")
        if phq8 is None:
            meta = SessionMeta(doc.session_id, None, Label.NOT_DEPRESSED, split)
        else:
            meta = SessionMeta(doc.session_id, int(phq8), label_from_score(int(phq8)), split)
        pairs.append((doc, meta))
    return pairs
