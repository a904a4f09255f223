import dataclasses
import datetime
import pathlib
from typing import Any


@dataclasses.dataclass(frozen=True)
class OutputChecksum:
    crc64: int
    file_name: str

    def line(self) -> str:
        return "{} {}\n".format(hex(self.crc64).replace("0x", ""), self.file_name)


@dataclasses.dataclass(frozen=True)
class SoftwareVersions:
    package: str
    python: str
    numpy: str
    scipy: str


@dataclasses.dataclass
class RunManifest:
    """
    Content of run.json: what was run, how it ended and with which software.
    """
    experiment: str
    config_path: pathlib.Path | None
    config_echo: dict[str, Any]
    termination: str
    versions: SoftwareVersions
    started: datetime.datetime
    wall_time: float
    final_time: float | None = None
    outputs: list[OutputChecksum] = dataclasses.field(default_factory=list)
    extra: dict[str, Any] = dataclasses.field(default_factory=dict)

    def json_serializable(self) -> dict[str, Any]:
        serializable = dataclasses.asdict(self)
        serializable["config_path"] = None if self.config_path is None else str(self.config_path)
        serializable["started"] = self.started.isoformat()
        serializable["outputs"] = [
            {"file": output.file_name, "crc64": hex(output.crc64).replace("0x", "")}
            for output in self.outputs
        ]
        return serializable
