"""Run configuration: dimensions, truncation order, star product source and suite bounds."""

import logging
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

import fdq.defaults as fd
import fdq.ring as fr
from fdq.errors import ConfigError, FdqError


logger = logging.getLogger(__name__)


def parse_matrix(text: str) -> list[list[str]]:
    """Reads `"0 1; -1 0"` as rows of rational strings."""
    rows = [row.split() for row in text.split(";")]
    return [[fr.format_rational(fr.to_rational(value)) for value in row] for row in rows if row]


def format_matrix(rows: list[list[str]]) -> str:
    return "; ".join(" ".join(row) for row in rows)


class Config(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    k: int = Field(default=0, ge=0)
    order: int = Field(default=fd.ORDER, ge=1)
    pi: Optional[list[list[str]]] = None
    star: Optional[Path] = None
    seed: int = fd.SEED
    degree_bound: int = Field(default=fd.DEGREE_BOUND, ge=0)
    cases: int = Field(default=fd.CASES, ge=1)

    @field_validator("pi", mode="before")
    @classmethod
    def read_pi(cls, value: Any) -> Any:
        match value:
            case None:
                return None
            case str():
                return parse_matrix(value)
            case _:
                return [[fr.format_rational(fr.to_rational(entry)) for entry in row] for row in value]

    @model_validator(mode="after")
    def check_star_source(self) -> "Config":
        if (self.pi is None) == (self.star is None):
            raise ValueError("Exactly one of pi or star must be given")
        if self.pi is not None:
            if len(self.pi) != self.n or any(len(row) != self.n for row in self.pi):
                raise ValueError(f"pi must be a {self.n}x{self.n} matrix")
            matrix = self.pi_matrix()
            if any(matrix[i][j] != -matrix[j][i] for i in range(self.n) for j in range(self.n)):
                raise ValueError("pi must be antisymmetric")
        return self

    def pi_matrix(self) -> list[list[Any]]:
        return [[fr.to_rational(value) for value in row] for row in self.pi or []]

    def context(self) -> fr.VarContext:
        return fr.VarContext(n=self.n, k=self.k)

    def to_lines(self) -> list[str]:
        lines = [f"n {self.n}", f"k {self.k}", f"order {self.order}"]
        if self.pi is not None:
            lines.append(f"pi {format_matrix(self.pi)}")
        if self.star is not None:
            lines.append(f"star {self.star}")
        lines += [f"seed {self.seed}", f"degree_bound {self.degree_bound}", f"cases {self.cases}"]
        return lines

    @classmethod
    def from_lines(cls, lines: list[str], base: Optional[Path] = None) -> "Config":
        """Parses `key value` lines. A relative `star` path is resolved against `base`.

        Raises:
            ConfigError: unknown keys, repeated keys or invalid values.
        """
        fields: dict[str, str] = {}
        for line in lines:
            key, _, value = line.strip().partition(" ")
            if not key:
                continue
            if key not in cls.model_fields:
                raise ConfigError(f"Unknown configuration key {key!r}")
            if key in fields:
                raise ConfigError(f"Configuration key {key!r} given twice")
            fields[key] = value.strip()
        if "star" in fields and base is not None and not Path(fields["star"]).is_absolute():
            fields["star"] = str(base / fields["star"])
        try:
            config = cls(**fields)
        except (ValidationError, FdqError) as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        logger.debug("Configuration read: %s", config)
        return config
