"""Shared vocabulary used across the arena modules."""
from __future__ import annotations

from enum import Enum


class Task(Enum):
    TEXT_TO_IMAGE = "text_to_image"
    IMAGE_EDITING = "image_editing"
    TEXT_TO_VIDEO = "text_to_video"


class MediaType(Enum):
    IMAGE = "image"
    VIDEO = "video"


def parse_task(value: str | Task) -> Task:
    if isinstance(value, Task):
        return value
    try:
        return Task(value)
    except ValueError:
        legal = ", ".join(t.value for t in Task)
        raise ValueError(f"unknown task {value!r}; expected one of: {legal}") from None
