"""Shared HTTP helper: JSON POST with bounded retries and backoff."""

from __future__ import annotations

import time
from typing import Any, Callable

import requests

from .errors import RetriesExhaustedError


def post_json(
    session: requests.Session,
    url: str,
    payload: dict,
    headers: dict[str, str],
    timeout: float,
    retries: int,
    backoff_base: float = 0.5,
    backoff_factor: float = 2.0,
    sleep: Callable[[float], None] = time.sleep,
) -> Any:
    """POST ``payload`` as JSON, retrying on transport errors and non-2xx.

    Performs at most ``retries`` retries (so ``retries + 1`` attempts) with
    exponential backoff between attempts. Raises RetriesExhaustedError once
    the budget is spent.
    """
    last_error = ""
    for attempt in range(retries + 1):
        if attempt > 0:
            sleep(backoff_base * backoff_factor ** (attempt - 1))
        try:
            response = session.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            last_error = f"transport error: {exc}"
            continue
        if 200 <= response.status_code < 300:
            try:
                return response.json()
            except ValueError:
                last_error = "malformed response body (not JSON)"
                continue
        last_error = f"HTTP {response.status_code}"
    raise RetriesExhaustedError(f"retries exhausted calling {url}: {last_error}")
