"""
Запись артефактов запуска.

Все файлы детерминированы: JSON с отсортированными ключами и без времени,
CSV с repr-точностью чисел. Каждый JSON несёт версию схемы и полный
разрешённый конфиг запуска.
"""

import csv
import json
from pathlib import Path
from typing import Any

from app.branch import BifurcationDiagram
from app.exceptions import SingularPlapError
from app.log import get_logger
from app.schemas import SCHEMA_VERSION, RunConfig, VerificationReport
from app.solve import LadderResult

log = get_logger(__name__)

FAILED_MARKER = "FAILED"


def config_record(config: RunConfig) -> dict[str, Any]:
    return config.model_dump(mode="json", by_alias=True)


def write_json(path: Path, payload: dict[str, Any], config: RunConfig) -> Path:
    """JSON-артефакт с schema_version и config."""
    document = {"schema_version": SCHEMA_VERSION, "config": config_record(config), **payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    log.info("artifact.written", path=str(path), kind="json")
    return path


def write_diagram_csv(diagram: BifurcationDiagram, path: Path) -> Path:
    """CSV диаграммы со столбцами lambda,branch,M,sup_norm."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "branch", "M", "sup_norm"])
        for pt in diagram.points:
            writer.writerow([repr(float(pt.lambda_)), pt.branch, repr(float(pt.M)), repr(float(pt.sup_norm))])
    log.info("artifact.written", path=str(path), kind="csv")
    return path


def write_ladder(ladder: LadderResult, out_dir: Path) -> list[str]:
    """По CSV на каждое n плюс экстраполированный предел; возвращает имена файлов."""
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for n, u in ladder.entries:
        name = f"ladder_n{n}.csv"
        u.to_csv(out_dir / name)
        names.append(name)
    ladder.extrapolated_limit.to_csv(out_dir / "ladder_limit.csv")
    names.append("ladder_limit.csv")
    log.info("artifact.written", path=str(out_dir), kind="ladder", files=len(names))
    return names


def write_report(report: VerificationReport, out_dir: Path, config: RunConfig) -> Path:
    """report.json и человекочитаемая report.txt."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.to_table(), encoding="utf-8")
    payload = report.model_dump(mode="json")
    payload.pop("schema_version")
    return write_json(out_dir / "report.json", payload, config)


def write_failed_marker(out_dir: Path, error: SingularPlapError, config: RunConfig) -> Path:
    """Маркер FAILED рядом с уже записанными частичными артефактами."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / FAILED_MARKER
    document = {"schema_version": SCHEMA_VERSION, "config": config_record(config), **error.to_record()}
    path.write_text(json.dumps(document, sort_keys=True, indent=2, default=repr) + "\n", encoding="utf-8")
    log.warning("artifact.failed_marker", path=str(path), error=type(error).__name__)
    return path
