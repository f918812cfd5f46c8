"""Identifying the changing concept between an input prompt and an edit prompt.

Prompts are tokenized on whitespace and case-folded, then aligned with a
longest-common-subsequence match. Runs of unmatched tokens form edit hunks:
tokens removed from the input prompt paired with tokens added by the edit
prompt. The "generic" prompt is the input prompt with every removed span
replaced by the literal token "object" (no article correction), which is
the text used to check that unedited semantics survive an edit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError

GENERIC_TOKEN = "object"

STATUS_EDIT = "edit"
STATUS_NO_EDIT = "no-edit"


@dataclass(frozen=True)
class PromptPair:
    """Input prompt and edit prompt as raw text."""

    input_prompt: str
    edit_prompt: str

    def __post_init__(self):
        if not self.input_prompt.strip() or not self.edit_prompt.strip():
            raise DomainError("prompts must be non-empty")

    def input_tokens(self) -> list[str]:
        return self.input_prompt.casefold().split()

    def edit_tokens(self) -> list[str]:
        return self.edit_prompt.casefold().split()


@dataclass(frozen=True)
class EditHunk:
    """One contiguous change: a removed span and the added span replacing it.

    ``removed_span``/``added_span`` are half-open token index ranges into
    the input and edit token lists. Either side may be empty (pure
    insertion or pure deletion).
    """

    removed: tuple[str, ...]
    added: tuple[str, ...]
    removed_span: tuple[int, int]
    added_span: tuple[int, int]


@dataclass
class PromptDiff:
    """Alignment result; ``hunks`` is empty iff ``status`` is no-edit."""

    status: str
    hunks: list[EditHunk] = field(default_factory=list)
    generic_tokens: list[str] = field(default_factory=list)

    @property
    def generic_text(self) -> str:
        return " ".join(self.generic_tokens)

    @property
    def removed_text(self) -> str:
        return " ".join(t for h in self.hunks for t in h.removed)

    @property
    def added_text(self) -> str:
        return " ".join(t for h in self.hunks for t in h.added)


def _lcs_matches(a: list[str], b: list[str]) -> list[tuple[int, int]]:
    """Matched index pairs of a longest common subsequence, ascending."""
    n, m = len(a), len(b)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, nxt = dp[i], dp[i + 1]
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    matches = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j] and dp[i][j] == dp[i + 1][j + 1] + 1:
            matches.append((i, j))
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return matches


def prompt_diff(pair: PromptPair) -> PromptDiff:
    """Align the two prompts and report the changed spans.

    Identical prompts yield a no-edit result with no hunks. Multiple
    disjoint changes yield one hunk each, in prompt order; callers pick
    the span they care about.
    """
    a = pair.input_tokens()
    b = pair.edit_tokens()
    matches = _lcs_matches(a, b)

    hunks: list[EditHunk] = []
    prev_i, prev_j = 0, 0
    for mi, mj in matches + [(len(a), len(b))]:
        if mi > prev_i or mj > prev_j:
            hunks.append(
                EditHunk(
                    removed=tuple(a[prev_i:mi]),
                    added=tuple(b[prev_j:mj]),
                    removed_span=(prev_i, mi),
                    added_span=(prev_j, mj),
                )
            )
        prev_i, prev_j = mi + 1, mj + 1

    if not hunks:
        return PromptDiff(status=STATUS_NO_EDIT, generic_tokens=list(a))

    generic: list[str] = []
    cursor = 0
    for hunk in hunks:
        start, end = hunk.removed_span
        generic.extend(a[cursor:start])
        if end > start:
            generic.append(GENERIC_TOKEN)
        cursor = end
    generic.extend(a[cursor:])
    return PromptDiff(status=STATUS_EDIT, hunks=hunks, generic_tokens=generic)
