"""
Caption template bank and lexicon

Direction, noise and switch words come from fixed lexicons and appear in
no other template, so a caption can be parsed back into the fields that
produced it.
"""

import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ..types import CaptionTemplateBank, Direction, NoiseLevel, TrendClass

DIRECTION_WORDS: Dict[Direction, Tuple[str, ...]] = {
    Direction.UPWARD: ("upward", "rising"),
    Direction.DOWNWARD: ("downward", "falling"),
}

NOISE_WORDS: Dict[NoiseLevel, Tuple[str, ...]] = {
    NoiseLevel.LOW: ("low", "mild"),
    NoiseLevel.MEDIUM: ("medium", "moderate"),
    NoiseLevel.HIGH: ("high", "heavy"),
}

SWITCH_WORDS = ("transits", "shifts", "switches")

ORDINALS = ("first", "then", "next", "after that")
FINAL_ORDINAL = "finally"

_WORD = re.compile(r"[a-z]+")


SYNTH_TEMPLATES: Dict[Tuple[str, str], Tuple[str, ...]] = {
    ("trend", "linear"): (
        "The series follows a linear {direction} trend.",
        "A straight-line {direction} trend runs through the values.",
    ),
    ("trend", "exponential"): (
        "The series follows an exponential {direction} trend.",
        "An accelerating exponential {direction} trend dominates the values.",
    ),
    ("trend_switch", "history"): (
        "The trend transits from {before} to {after} at step {time}.",
        "At step {time} the trend shifts from {before} to {after}.",
    ),
    ("trend_switch", "future"): (
        "The trend transits from {before} to {after} after {time} steps.",
        "After {time} steps the trend switches from {before} to {after}.",
    ),
    ("seasonality", "cosine"): (
        "A cosine seasonal pattern repeats every {period} steps.",
        "Smooth cosine seasonality recurs with period {period}.",
    ),
    ("seasonality", "linear"): (
        "A sawtooth seasonal pattern repeats every {period} steps.",
        "Piecewise straight seasonal ramps recur with period {period}.",
    ),
    ("seasonality", "exponential"): (
        "An exponential ramp seasonal pattern repeats every {period} steps.",
        "Curved exponential seasonal ramps recur with period {period}.",
    ),
    ("seasonality", "m_shape"): (
        "An M-shaped seasonal pattern repeats every {period} steps.",
        "Double-peaked M-shaped seasonality recurs with period {period}.",
    ),
    ("seasonality", "trapezoidal"): (
        "A trapezoidal seasonal pattern repeats every {period} steps.",
        "Flat-topped trapezoidal seasonality recurs with period {period}.",
    ),
    ("season_switch", "history"): (
        "The seasonal amplitude switches to {ratio} its earlier size at step {time}.",
        "At step {time} the seasonal amplitude shifts to {ratio} its earlier size.",
    ),
    ("season_switch", "future"): (
        "The seasonal amplitude switches to {ratio} its earlier size after {time} steps.",
        "After {time} steps the seasonal amplitude shifts to {ratio} its earlier size.",
    ),
    ("noise", "low"): (
        "Observations carry {noise} noise.",
        "The noise level is {noise}.",
    ),
    ("noise", "medium"): (
        "Observations carry {noise} noise.",
        "The noise level is {noise}.",
    ),
    ("noise", "high"): (
        "Observations carry {noise} noise.",
        "The noise level is {noise}.",
    ),
    ("noise_switch", "history"): (
        "Noise shifts from {before} to {after} at step {time}.",
        "At step {time} the noise switches from {before} to {after}.",
    ),
    ("noise_switch", "future"): (
        "Noise shifts from {before} to {after} after {time} steps.",
        "After {time} steps the noise switches from {before} to {after}.",
    ),
    ("combination", "additive"): (
        "Trend and seasonality add together.",
        "The seasonal swings sit on top of the trend.",
    ),
    ("combination", "multiplicative"): (
        "Seasonal swings scale with the trend level.",
        "Seasonality multiplies the trend.",
    ),
}

# Every clause names its trend class and noise class literally
SEGMENT_TEMPLATES: Dict[Tuple[str, str], Tuple[str, ...]] = {
    ("segment", TrendClass.INCREASING.value): (
        "{ordinal} the series is increasing with {noise} noise",
        "{ordinal} values keep increasing under {noise} noise",
    ),
    ("segment", TrendClass.DECREASING.value): (
        "{ordinal} the series is decreasing with {noise} noise",
        "{ordinal} values keep decreasing under {noise} noise",
    ),
    ("segment", TrendClass.FLUCTUATING.value): (
        "{ordinal} the series is fluctuating with {noise} noise",
        "{ordinal} values are fluctuating under {noise} noise",
    ),
}


def default_bank() -> CaptionTemplateBank:
    """Bank covering every (component, state) the generator and captioner reach"""
    templates = dict(SYNTH_TEMPLATES)
    templates.update(SEGMENT_TEMPLATES)
    return CaptionTemplateBank(templates)


def ordinal(index: int, total: int) -> str:
    """Position word of clause `index` among `total` clauses"""
    if total > 1 and index == total - 1:
        return FINAL_ORDINAL
    return ORDINALS[min(index, len(ORDINALS) - 1)]


@dataclass(frozen=True)
class ParsedCaption:
    """Fields recovered from a generated caption pair"""
    direction: Optional[Direction]
    noise: Optional[NoiseLevel]
    has_switch: bool


def _lookup(words, table) -> Optional[object]:
    reverse = {word: key for key, options in table.items() for word in options}
    for word in words:
        if word in reverse:
            return reverse[word]
    return None


def parse_caption(history_text: str, future_text: str) -> ParsedCaption:
    """
    Recover (initial trend direction, initial noise level, switch presence).

    The history caption leads with its trend sentence and names the noise
    before any noise switch, so the first lexicon hit is the initial state.
    """
    history_words = _WORD.findall(history_text.lower())
    future_words = _WORD.findall(future_text.lower())
    return ParsedCaption(
        direction=_lookup(history_words, DIRECTION_WORDS),
        noise=_lookup(history_words, NOISE_WORDS),
        has_switch=any(word in SWITCH_WORDS for word in history_words + future_words),
    )
