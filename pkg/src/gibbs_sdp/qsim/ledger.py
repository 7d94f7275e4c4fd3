"""Integer query-cost bookkeeping for simulated runs."""

import json
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = 1


@dataclass
class RoundRecord:
    t: int
    k_t: int
    N_t: int
    C_t: int
    G_hbar_t: int
    G_M_t: int
    measurement_cost_t: int
    grid_points: int = 0
    deviation: float = None


@dataclass
class CostLedger:
    """Per-round records plus running maxima and phase totals.

    ``C_t`` counts state copies consumed by the ORACLE search and the payoff
    sampling of round ``t``; ``measurement_cost_t`` counts query units spent
    estimating expectations. ``total`` is the sum of both over all rounds.
    """

    rounds: list = field(default_factory=list)
    G_hbar: int = 0
    G_M: int = 0
    T_meas: int = 0
    hoeffding_events: int = 0
    sampler_preparations: int = 0

    def record(self, rec):
        if self.rounds and rec.t <= self.rounds[-1].t:
            raise ValueError("rounds must be recorded in increasing order")
        self.rounds.append(rec)
        self.G_hbar = max(self.G_hbar, rec.G_hbar_t)
        self.G_M = max(self.G_M, rec.G_M_t)

    def add_measurement_only(self, t, cost, grid_points, G_hbar_t, G_M_t):
        """A round that ended in Larger: only the search was paid for."""
        self.record(RoundRecord(t=t, k_t=0, N_t=0, C_t=0, G_hbar_t=G_hbar_t, G_M_t=G_M_t,
                                measurement_cost_t=cost, grid_points=grid_points))

    @property
    def oracle_total(self):
        return sum(r.C_t for r in self.rounds)

    @property
    def measurement_total(self):
        return sum(r.measurement_cost_t for r in self.rounds)

    @property
    def total(self):
        return self.oracle_total + self.measurement_total

    @property
    def phase_totals(self):
        return {"oracle_copies": self.oracle_total, "measurement": self.measurement_total}

    def consistent(self):
        """Totals re-derived from the records match, and maxima dominate every round."""
        return (self.total == sum(r.C_t + r.measurement_cost_t for r in self.rounds)
                and all(r.G_hbar_t <= self.G_hbar and r.G_M_t <= self.G_M for r in self.rounds))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "G_hbar": self.G_hbar,
            "G_M": self.G_M,
            "T_meas": self.T_meas,
            "hoeffding_events": self.hoeffding_events,
            "sampler_preparations": self.sampler_preparations,
            "totals": {**self.phase_totals, "total": self.total},
            "rounds": [asdict(r) for r in self.rounds],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported ledger schema {data.get('schema_version')!r}")
        led = cls(G_hbar=data["G_hbar"], G_M=data["G_M"], T_meas=data["T_meas"],
                  hoeffding_events=data.get("hoeffding_events", 0),
                  sampler_preparations=data.get("sampler_preparations", 0))
        led.rounds = [RoundRecord(**r) for r in data["rounds"]]
        if led.total != data["totals"]["total"]:
            raise ValueError("ledger totals do not match its rounds")
        return led
