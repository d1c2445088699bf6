import csv
import hashlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
from uuid import uuid4

import ujson as json

from bilap import __version__
from bilap.config import config
from bilap.helpers import const
from bilap.helpers.utils import Utils, jsonable

logger = logging.getLogger(__name__)

TOOL_NAME = "bilap"


class ReportKinds(Enum):
    report = 1
    table = 2
    timings = 3


PARAMS = {
    ReportKinds.report.value: {"extension": "json", "file_suffix": ""},
    ReportKinds.table.value: {"extension": "csv", "file_suffix": ""},
    ReportKinds.timings.value: {"extension": "json", "file_suffix": "_timings"},
}


def canonical_json(data) -> str:
    return json.dumps(jsonable(data), sort_keys=True, ensure_ascii=False, escape_forward_slashes=False)


def config_hash(run_config: Dict) -> str:
    """
    SHA-256 of the run configuration together with every library default and the tool version
    :param run_config:
    :return:
    """
    stamped = {"run": run_config, "settings": config.as_dict(), "version": __version__}
    return hashlib.sha256(canonical_json(stamped).encode("utf-8")).hexdigest()


@dataclass
class Report:
    command: str
    run_config: Dict
    payload: Dict
    status: str = const.STATUS_OK
    exit_code: int = const.EXIT_OK
    # rows of the command's table, written as CSV when the csv format is requested
    table: Optional[List[Dict]] = None
    columns: Optional[Sequence[str]] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return config_hash(self.run_config)

    def to_json_dict(self) -> Dict:
        """Everything but the timings, so reruns of one config give identical files"""
        return {
            "tool": TOOL_NAME,
            "version": __version__,
            "command": self.command,
            "config": self.run_config,
            "settings": config.as_dict(),
            "config_hash": self.config_hash,
            "status": self.status,
            "payload": self.payload,
        }


def _generate_file_name(report: Report, kind: int) -> str:
    params = PARAMS[kind]
    file_name = "_".join([const.REPORT_FILE_PREFIX, report.command, report.config_hash[:12]])
    return f"{file_name}{params['file_suffix']}.{params['extension']}"


def _append_uniq_postfix(file_name: str) -> str:
    file_name = Path(file_name)
    postfix = uuid4().hex[:8]
    return f"{file_name.stem}_{postfix}{file_name.suffix}"


def _get_base_path(directory: Union[str, Path]) -> Path:
    path = Path(directory)
    if not path.exists():
        path.mkdir(parents=True)
    return path


def _get_write_path(report: Report, directory: Union[str, Path], rewrite: bool, kind: int) -> Path:
    base_path = _get_base_path(directory)
    file_name = _generate_file_name(report, kind)
    path = base_path.joinpath(file_name)

    if not rewrite and path.exists():
        path = base_path.joinpath(_append_uniq_postfix(file_name))

    logger.info("report path: %s", path)
    return path


def write_json(data: Dict, path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_json(data))
        f.write("\n")


def write_csv(rows: Sequence[Dict], columns: Sequence[str], path: Path) -> None:
    """
    One row per dict; floats with 17 significant digits, '.' decimal point, '\\n' line endings
    :param rows:
    :param columns:
    :param path:
    :return:
    """
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_cell(row.get(key)) for key in columns})


def _csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    return Utils.format_float(value)


def save_report(
    report: Report, directory: Union[str, Path], fmt: str = const.JSON_FORMAT, rewrite: bool = True
) -> List[Path]:
    """
    Writes the JSON report, the table as CSV when fmt is csv and the command has one,
    and the wall-clock timings next to them
    :param report:
    :param directory:
    :param fmt: const.JSON_FORMAT or const.CSV_FORMAT
    :param rewrite: overwrite files of an earlier run with the same config
    :return: written paths
    """
    written = []
    path = _get_write_path(report, directory, rewrite, ReportKinds.report.value)
    write_json(report.to_json_dict(), path)
    written.append(path)
    if fmt == const.CSV_FORMAT and report.table is not None:
        path = _get_write_path(report, directory, rewrite, ReportKinds.table.value)
        columns = report.columns
        if columns is None:
            columns = sorted(report.table[0]) if report.table else []
        write_csv(report.table, columns, path)
        written.append(path)
    if report.timings:
        path = _get_write_path(report, directory, rewrite, ReportKinds.timings.value)
        write_json({"config_hash": report.config_hash, "timings": report.timings}, path)
        written.append(path)
    return written
