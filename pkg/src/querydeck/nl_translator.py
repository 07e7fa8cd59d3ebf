"""Translate natural-language questions into templates via a text-completion backend.

The prompt is fully deterministic: a fixed instruction header, the example
bank in file order, then the target schema and question.  Responses are
parsed and validated against the catalog; failures feed their error text
back into a retry prompt, up to MAX_ATTEMPTS per question.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol

import httpx

from .catalog import DatasetCatalog
from .errors import (
    BackendUnavailable,
    BankParseError,
    EmptyBank,
    SpsSyntaxError,
    TranslationFailed,
)
from .sps_grammar import Diagnostic, SpsTemplate, parse_sps, validate_template

MAX_ATTEMPTS = 3

_BANK_FILE = "example_bank.txt"
_MOCK_FILE = "mock_responses.json"

_PROMPT_HEADER = """\
Translate each question about a table into a SQL template.  Templates are
ordinary SQL that may embed choice tokens:
  ANY{a, b}      pick exactly one alternative
  ANY{lo-hi}     pick a number between lo and hi
  ANY{&col}      pick one value of column col
  SUBSET[sep]{a, b}  pick one or more alternatives, joined by sep
  OPT{x}         include x or leave it out
Use today() for the current date.  Answer with the template only.
"""


@dataclass(frozen=True)
class BankExample:
    """One schema / question / template record from the example bank."""

    schema: str
    nl: str
    sps: str


def _parse_bank(text: str) -> list[BankExample]:
    examples = []
    records = re.split(r"^---\s*$", text, flags=re.MULTILINE)
    index = 0
    for record in records:
        if not record.strip():
            continue
        fields: dict[str, list[str]] = {}
        current: str | None = None
        for line in record.splitlines():
            m = re.match(r"(SCHEMA|NL|SPS):\s?(.*)$", line)
            if m:
                current = m.group(1)
                if current in fields:
                    raise BankParseError(index, f"duplicate field {current}")
                fields[current] = [m.group(2)]
            elif current is not None:
                fields[current].append(line)
            elif line.strip():
                raise BankParseError(index, f"text before first field: {line!r}")
        missing = {"SCHEMA", "NL", "SPS"} - fields.keys()
        if missing:
            raise BankParseError(index, f"missing fields: {sorted(missing)}")
        examples.append(
            BankExample(
                schema="\n".join(fields["SCHEMA"]).strip(),
                nl="\n".join(fields["NL"]).strip(),
                sps="\n".join(fields["SPS"]).strip(),
            )
        )
        index += 1
    if not examples:
        raise EmptyBank("example bank has no records")
    return examples


def load_example_bank(path: str | None = None) -> list[BankExample]:
    """Bank records from ``path``, or the packaged bank when path is None."""
    if path is None:
        text = resources.files("querydeck.data").joinpath(_BANK_FILE).read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return _parse_bank(text)


def render_prompt(
    bank: list[BankExample],
    schema_text: str,
    question: str,
    feedback: str | None = None,
) -> str:
    parts = [_PROMPT_HEADER]
    for ex in bank:
        parts.append(f"Schema: {ex.schema}\nQ: {ex.nl}\nSPS: {ex.sps}\n")
    if feedback:
        parts.append(feedback)
    parts.append(f"Schema: {schema_text}\nQ: {question}\nSPS:")
    return "\n".join(parts)


class TranslationBackend(Protocol):
    def complete(self, prompt: str) -> str: ...


_LAST_QUESTION_RE = re.compile(r"^Q: (.*)$", re.MULTILINE)


class MockBackend:
    """Deterministic backend keyed by the exact question text.

    A string response is returned on every call; a list is consumed one
    element per call (for exercising the retry loop), repeating its last
    element once exhausted.
    """

    def __init__(self, responses: dict[str, str | list[str]]):
        self._responses = {k: list(v) if isinstance(v, list) else [v] for k, v in responses.items()}
        self._cursor: dict[str, int] = {}

    @classmethod
    def default(cls) -> MockBackend:
        text = resources.files("querydeck.data").joinpath(_MOCK_FILE).read_text("utf-8")
        return cls(json.loads(text))

    def complete(self, prompt: str) -> str:
        matches = _LAST_QUESTION_RE.findall(prompt)
        if not matches:
            return ""
        key = matches[-1]
        options = self._responses.get(key)
        if not options:
            return ""
        i = self._cursor.get(key, 0)
        self._cursor[key] = i + 1
        return options[min(i, len(options) - 1)]


class LiveBackend:
    """Completion-API client; endpoint and credentials come from the environment."""

    def __init__(
        self,
        url: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        timeout: float = 30.0,
    ):
        self.url = url or os.environ.get("QUERYDECK_LLM_URL")
        self.model = model or os.environ.get("QUERYDECK_LLM_MODEL", "")
        self.api_key = api_key or os.environ.get("QUERYDECK_LLM_KEY", "")
        self.timeout = timeout
        if not self.url:
            raise BackendUnavailable("QUERYDECK_LLM_URL is not set")

    def complete(self, prompt: str) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "prompt": prompt,
            "temperature": 0,
            "max_tokens": 256,
        }
        try:
            response = httpx.post(self.url, json=payload, headers=headers, timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendUnavailable(str(exc)) from exc
        try:
            return data["choices"][0]["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"malformed completion response: {data!r}") from exc


_FENCE_RE = re.compile(r"^```[a-z]*\s*|\s*```$", re.IGNORECASE)


def clean_response(raw: str) -> str:
    """Trim fences and an echoed SPS: tag off a model completion."""
    text = _FENCE_RE.sub("", raw.strip()).strip()
    if text.upper().startswith("SPS:"):
        text = text[4:].strip()
    return text


@dataclass
class TranslationResult:
    nl: str
    template: SpsTemplate | None
    attempts: int
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.template is not None


def _render_feedback(sps_text: str, diagnostics: list[Diagnostic]) -> str:
    lines = ["The previous answer was rejected.", f"SPS: {sps_text}", "Errors:"]
    for d in diagnostics:
        lines.append(f"- {d.kind}: {d.message}")
    lines.append("Answer again with a corrected template.\n")
    return "\n".join(lines)


def translate_one(
    question: str,
    catalog: DatasetCatalog,
    backend: TranslationBackend,
    bank: list[BankExample] | None = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> TranslationResult:
    """Template for one question, retrying with error feedback.

    Raises TranslationFailed when every attempt is rejected.
    """
    if bank is None:
        bank = load_example_bank()
    schema_text = catalog.schema_text()
    feedback: str | None = None
    collected: list[Diagnostic] = []
    for attempt in range(1, max_attempts + 1):
        prompt = render_prompt(bank, schema_text, question, feedback)
        text = clean_response(backend.complete(prompt))
        try:
            template = parse_sps(text)
        except SpsSyntaxError as exc:
            diagnostics = [Diagnostic("syntax_error", str(exc), None, text)]
        else:
            diagnostics = validate_template(template, catalog)
            if not diagnostics:
                return TranslationResult(question, template, attempt, collected)
        collected.extend(diagnostics)
        feedback = _render_feedback(text, diagnostics)
    raise TranslationFailed(question, [f"{d.kind}: {d.message}" for d in collected])


def translate_all(
    questions: list[str],
    catalog: DatasetCatalog,
    backend: TranslationBackend,
    bank: list[BankExample] | None = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> list[TranslationResult]:
    """Translate each question, collecting per-question failures instead of raising."""
    if bank is None:
        bank = load_example_bank()
    results = []
    for question in questions:
        try:
            results.append(translate_one(question, catalog, backend, bank, max_attempts))
        except TranslationFailed as exc:
            diagnostics = [Diagnostic("failed", d) for d in exc.diagnostics]
            results.append(TranslationResult(question, None, max_attempts, diagnostics))
    return results
