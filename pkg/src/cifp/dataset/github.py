"""Provider access: repository lookups, workflow-run listing, pagination.

The ops in sampling.py only depend on the small probe interface below, so
tests can substitute in-memory fakes and the HTTP client can point at mock
servers via its base URL.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Protocol

import requests

from cifp.dataset.records import WorkflowJob, WorkflowRun
from cifp.errors import AcquisitionError, RateLimitError
from cifp.griddata.intensity import parse_rfc3339

TOKEN_ENV_VAR = "CIFP_GITHUB_TOKEN"
DEFAULT_BASE_URL = "https://api.github.com"
PAGE_SIZE = 100


@dataclass(frozen=True)
class RepoInfo:
    """Repository metadata as returned by a lookup (public repos only)."""

    repo_id: int
    full_name: str
    is_fork: bool
    is_archived: bool
    last_push_at: datetime | None


class ForbiddenError(AcquisitionError):
    """Access permanently denied (not a rate limit); repo is unretrievable."""


class RepositoryProbe(Protocol):
    """Capability to inspect the repository population."""

    def latest_repository_id(self) -> int: ...

    def lookup_repository(self, repo_id: int) -> RepoInfo | None: ...

    def count_runs_in_year(self, full_name: str, year: int) -> int: ...

    def list_runs_page(self, repo_id: int, full_name: str, year: int, page: int) -> tuple[list[WorkflowRun], int | None]: ...

    def list_jobs_page(self, full_name: str, run_id: int, page: int) -> tuple[list[WorkflowJob], int | None]: ...


class TokenBucket:
    """Simple thread-safe limiter for outbound request rate."""

    def __init__(self, max_per_second: float, clock=time.monotonic, sleep=time.sleep):
        self.rate = max_per_second
        self._tokens = max_per_second
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self.rate <= 0:
            return
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.rate, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            self._sleep(wait)


@dataclass(frozen=True)
class RetryPolicy:
    """Bounded retry with exponential back-off for transient failures."""

    attempts: int = 3
    base_delay_s: float = 1.0
    sleep: Callable[[float], None] = time.sleep

    def run(self, call: Callable[[], object]):
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            try:
                return call()
            except RateLimitError as exc:
                last_error = exc
                if attempt + 1 >= self.attempts:
                    break
                delay = exc.retry_after
                if delay is None:
                    delay = self.base_delay_s * 2**attempt
                self.sleep(delay)
        raise AcquisitionError(f"gave up after {self.attempts} attempts: {last_error}")


def _trigger_from_event(event: str) -> str:
    return event if event else "other"


class GithubProbe:
    """REST client implementing RepositoryProbe against a configurable base URL."""

    def __init__(
        self,
        token: str | None,
        base_url: str = DEFAULT_BASE_URL,
        max_requests_per_second: float = 10.0,
        timeout_s: float = 30.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._bucket = TokenBucket(max_requests_per_second)
        self._session = session or requests.Session()
        self._session.headers.update({"Accept": "application/vnd.github+json"})
        if token:
            self._session.headers["Authorization"] = f"Bearer {token}"

    def _get(self, path: str, params: dict | None = None) -> dict | None:
        """GET a JSON payload; None for 404; raises on rate-limit/forbidden."""
        self._bucket.acquire()
        url = f"{self.base_url}{path}"
        try:
            response = self._session.get(url, params=params, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise AcquisitionError(f"request to {url} failed: {exc}") from exc
        if response.status_code == 404:
            return None
        if response.status_code in (403, 429):
            if response.headers.get("X-RateLimit-Remaining") == "0" or response.status_code == 429:
                retry_after = response.headers.get("Retry-After")
                raise RateLimitError(
                    f"rate limited on {path}",
                    retry_after=float(retry_after) if retry_after else None,
                )
            raise ForbiddenError(f"forbidden: {path}")
        if response.status_code >= 400:
            raise AcquisitionError(f"HTTP {response.status_code} on {path}")
        try:
            return response.json()
        except ValueError as exc:
            raise AcquisitionError(f"non-JSON response from {path}") from exc

    def latest_repository_id(self) -> int:
        payload = self._get(
            "/search/repositories",
            params={"q": "is:public", "sort": "created", "order": "desc", "per_page": 1},
        )
        if not payload or not payload.get("items"):
            raise AcquisitionError("could not locate the most recently created repository")
        return int(payload["items"][0]["id"])

    def lookup_repository(self, repo_id: int) -> RepoInfo | None:
        payload = self._get(f"/repositories/{repo_id}")
        if payload is None:
            return None
        pushed_raw = payload.get("pushed_at")
        return RepoInfo(
            repo_id=int(payload["id"]),
            full_name=payload.get("full_name", ""),
            is_fork=bool(payload.get("fork", False)),
            is_archived=bool(payload.get("archived", False)),
            last_push_at=parse_rfc3339(pushed_raw) if pushed_raw else None,
        )

    def count_runs_in_year(self, full_name: str, year: int) -> int:
        payload = self._get(
            f"/repos/{full_name}/actions/runs",
            params={"created": _year_range(year), "per_page": 1},
        )
        if payload is None:
            return 0
        return int(payload.get("total_count", 0))

    def list_runs_page(
        self, repo_id: int, full_name: str, year: int, page: int
    ) -> tuple[list[WorkflowRun], int | None]:
        payload = self._get(
            f"/repos/{full_name}/actions/runs",
            params={"created": _year_range(year), "per_page": PAGE_SIZE, "page": page},
        )
        if payload is None:
            return [], None
        raw_runs = payload.get("workflow_runs", [])
        runs = [
            WorkflowRun(
                run_id=int(raw["id"]),
                repo_id=repo_id,
                workflow_path=raw.get("path"),
                trigger_event=_trigger_from_event(raw.get("event", "")),
                created_at=parse_rfc3339(raw["created_at"]),
            )
            for raw in raw_runs
        ]
        total = int(payload.get("total_count", 0))
        next_page = page + 1 if page * PAGE_SIZE < total and raw_runs else None
        return runs, next_page

    def list_jobs_page(self, full_name: str, run_id: int, page: int) -> tuple[list[WorkflowJob], int | None]:
        payload = self._get(
            f"/repos/{full_name}/actions/runs/{run_id}/jobs",
            params={"per_page": PAGE_SIZE, "page": page},
        )
        if payload is None:
            return [], None
        raw_jobs = payload.get("jobs", [])
        jobs = []
        for raw in raw_jobs:
            started = raw.get("started_at")
            completed = raw.get("completed_at")
            labels = raw.get("labels") or []
            if started is None:
                continue
            jobs.append(
                WorkflowJob(
                    job_id=int(raw["id"]),
                    run_id=run_id,
                    started_at=parse_rfc3339(started),
                    completed_at=parse_rfc3339(completed) if completed else None,
                    runner_label=",".join(labels),
                    is_self_hosted="self-hosted" in labels,
                    conclusion=raw.get("conclusion") or "other",
                )
            )
        total = int(payload.get("total_count", 0))
        next_page = page + 1 if page * PAGE_SIZE < total and raw_jobs else None
        return jobs, next_page


def _year_range(year: int) -> str:
    return f"{year}-01-01..{year}-12-31"


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
