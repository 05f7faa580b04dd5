"""Line-delimited dataset archives.

One JSON object per line after a schema header; streamable at millions of
records. load(store(x)) == x field-for-field.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO

from cifp.dataset.records import Dataset, RepositoryRecord, WorkflowJob, WorkflowRun
from cifp.errors import ArchiveError
from cifp.griddata.intensity import format_rfc3339, parse_rfc3339

DATASET_SCHEMA = "cifp.dataset.v1"

KIND_REPOSITORY = "repository"
KIND_RUN = "run"
KIND_JOB = "job"
KIND_UNRETRIEVABLE = "unretrievable"


def _ts(instant) -> str | None:
    return None if instant is None else format_rfc3339(instant)


def _repo_payload(repo: RepositoryRecord) -> dict:
    return {
        "kind": KIND_REPOSITORY,
        "repo_id": repo.repo_id,
        "full_name": repo.full_name,
        "is_fork": repo.is_fork,
        "is_archived": repo.is_archived,
        "last_push_at": _ts(repo.last_push_at),
        "collected_at": _ts(repo.collected_at),
        "uses_actions_in_year": repo.uses_actions_in_year,
    }


def _run_payload(run: WorkflowRun) -> dict:
    return {
        "kind": KIND_RUN,
        "run_id": run.run_id,
        "repo_id": run.repo_id,
        "workflow_path": run.workflow_path,
        "trigger_event": run.trigger_event,
        "created_at": _ts(run.created_at),
    }


def _job_payload(job: WorkflowJob) -> dict:
    return {
        "kind": KIND_JOB,
        "job_id": job.job_id,
        "run_id": job.run_id,
        "started_at": _ts(job.started_at),
        "completed_at": _ts(job.completed_at),
        "runner_label": job.runner_label,
        "is_self_hosted": job.is_self_hosted,
        "conclusion": job.conclusion,
    }


def store_dataset(dataset: Dataset, target: str | Path | IO[str]) -> None:
    if hasattr(target, "write"):
        _write(dataset, target)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        _write(dataset, fh)


def _write(dataset: Dataset, fh: IO[str]) -> None:
    fh.write(f"#schema={DATASET_SCHEMA}\n")
    for repo in dataset.repositories:
        fh.write(json.dumps(_repo_payload(repo), sort_keys=True) + "\n")
    for repo_id in dataset.unretrievable_repo_ids:
        fh.write(json.dumps({"kind": KIND_UNRETRIEVABLE, "repo_id": repo_id}, sort_keys=True) + "\n")
    for run in dataset.runs:
        fh.write(json.dumps(_run_payload(run), sort_keys=True) + "\n")
    for job in dataset.jobs:
        fh.write(json.dumps(_job_payload(job), sort_keys=True) + "\n")


def load_dataset(source: str | Path | IO[str]) -> Dataset:
    if hasattr(source, "read"):
        return _read(source)
    with open(source, encoding="utf-8") as fh:
        return _read(fh)


def _field(payload: dict, name: str, line_no: int):
    try:
        return payload[name]
    except KeyError:
        raise ArchiveError("missing field", line_no, field=name) from None


def _parse_ts(raw, field: str, line_no: int, optional: bool = False):
    if raw is None:
        if optional:
            return None
        raise ArchiveError("timestamp may not be null", line_no, field=field)
    try:
        return parse_rfc3339(raw)
    except (TypeError, ValueError) as exc:
        raise ArchiveError(f"bad timestamp: {exc}", line_no, field=field) from exc


def _read(fh: IO[str]) -> Dataset:
    lines = iter(enumerate(fh, start=1))
    try:
        _, header = next(lines)
    except StopIteration:
        raise ArchiveError("empty archive", 1) from None
    if header.strip() != f"#schema={DATASET_SCHEMA}":
        raise ArchiveError(f"expected '#schema={DATASET_SCHEMA}' header", 1)
    repositories: list[RepositoryRecord] = []
    runs: list[WorkflowRun] = []
    jobs: list[WorkflowJob] = []
    unretrievable: list[int] = []
    for line_no, line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ArchiveError(f"invalid JSON: {exc.msg}", line_no) from exc
        kind = _field(payload, "kind", line_no)
        try:
            if kind == KIND_REPOSITORY:
                repositories.append(
                    RepositoryRecord(
                        repo_id=_field(payload, "repo_id", line_no),
                        full_name=_field(payload, "full_name", line_no),
                        is_fork=_field(payload, "is_fork", line_no),
                        is_archived=_field(payload, "is_archived", line_no),
                        last_push_at=_parse_ts(
                            payload.get("last_push_at"), "last_push_at", line_no, optional=True
                        ),
                        collected_at=_parse_ts(
                            _field(payload, "collected_at", line_no), "collected_at", line_no
                        ),
                        uses_actions_in_year=_field(payload, "uses_actions_in_year", line_no),
                    )
                )
            elif kind == KIND_RUN:
                runs.append(
                    WorkflowRun(
                        run_id=_field(payload, "run_id", line_no),
                        repo_id=_field(payload, "repo_id", line_no),
                        workflow_path=payload.get("workflow_path"),
                        trigger_event=_field(payload, "trigger_event", line_no),
                        created_at=_parse_ts(
                            _field(payload, "created_at", line_no), "created_at", line_no
                        ),
                    )
                )
            elif kind == KIND_JOB:
                jobs.append(
                    WorkflowJob(
                        job_id=_field(payload, "job_id", line_no),
                        run_id=_field(payload, "run_id", line_no),
                        started_at=_parse_ts(
                            _field(payload, "started_at", line_no), "started_at", line_no
                        ),
                        completed_at=_parse_ts(
                            payload.get("completed_at"), "completed_at", line_no, optional=True
                        ),
                        runner_label=_field(payload, "runner_label", line_no),
                        is_self_hosted=_field(payload, "is_self_hosted", line_no),
                        conclusion=_field(payload, "conclusion", line_no),
                    )
                )
            elif kind == KIND_UNRETRIEVABLE:
                unretrievable.append(int(_field(payload, "repo_id", line_no)))
            else:
                raise ArchiveError(f"unknown record kind {kind!r}", line_no, field="kind")
        except (TypeError, ValueError) as exc:
            raise ArchiveError(str(exc), line_no) from exc
    return Dataset.build(repositories, runs, jobs, unretrievable)
