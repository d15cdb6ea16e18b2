"""Session state shared by every module call of one command."""

import logging
from typing import Dict, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..config import SessionSettings, WorkbenchSettings
from ..diffalg import get_registry, reset_registry
from ..errors import UsageError

logger = logging.getLogger(__name__)


class Session(BaseModel):
    """
    Rank, truncation orders and sign conventions of one command.

    `start()` resets the global generator registry, so all module calls made
    afterwards share one registry declared for rank n.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(description="Rank of SL(n)")
    h_order: int = Field(ge=0, description="Truncation order of the h-series tables")
    t_degree: int = Field(ge=0, description="Maximal t-degree kept by mod-t truncation")
    localize_tn: bool = Field(default=True, description="Allow negative powers of t_n")
    bracket_sign: Literal[1, -1] = Field(default=1, description="Poisson bracket orientation")
    companion_orientation: Literal["last_column", "transposed"] = Field(
        default="last_column", description="Companion matrix orientation"
    )

    @property
    def h_denominator(self) -> int:
        """Grades are multiples of 1/n."""
        return self.n

    @classmethod
    def from_settings(cls, settings: WorkbenchSettings, **flags) -> "Session":
        """
        Session defaults from settings, with non-None CLI flags taking precedence.

        Raises:
            UsageError: a flag is out of range
        """
        values = {k: v for k, v in flags.items() if v is not None}
        if "n" in values and values["n"] < 2:
            raise UsageError(f"n must be at least 2, got {values['n']}")
        base: SessionSettings = settings.session
        merged = {**base.model_dump(), **values}
        try:
            checked = SessionSettings.model_validate(merged)
        except ValueError as e:
            raise UsageError(str(e)) from e
        return cls(**checked.model_dump())

    def start(self) -> "Session":
        reset_registry(self.n, localize_tn=self.localize_tn)
        logger.debug("session started: n=%d h_order=%d", self.n, self.h_order)
        return self

    def registry_snapshot(self) -> Dict[str, Tuple[int, int]]:
        return get_registry().snapshot()
