"""
Student's-t output head
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..types import StudentTParams

SCALE_FLOOR = 1e-4
DOF_FLOOR = 2.0


class StudentTHead(nn.Module):
    """
    Last patch token (B, d_m) -> one affine map to 3h raw values laid out
    [mu | sigma_raw | nu_raw]:

        mu    = raw_mu
        sigma = softplus(sigma_raw) + 1e-4
        nu    = 2 + softplus(nu_raw) + 1e-4

    so sigma > 0 and nu > 2 hold for any finite input.
    """

    def __init__(self, d_model: int, horizon: int):
        super().__init__()
        self.horizon = horizon
        self.proj = nn.Linear(d_model, 3 * horizon)

    def params_from_raw(self, raw: torch.Tensor) -> StudentTParams:
        h = self.horizon
        return StudentTParams(
            location=raw[..., :h],
            scale=F.softplus(raw[..., h:2 * h]) + SCALE_FLOOR,
            dof=DOF_FLOOR + F.softplus(raw[..., 2 * h:]) + SCALE_FLOOR,
        )

    def forward(self, last_token: torch.Tensor) -> StudentTParams:
        return self.params_from_raw(self.proj(last_token))

    def zero_init(self) -> None:
        nn.init.zeros_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)
