from .background import BackgroundAgent, InformedAgent, OrderIntent, ZIAgent, informed_act, zi_act
from .base import PortfolioState, TradingAgent, mark_to_market
from .belief import (
    DegeneratePrecisionError,
    PrivateValues,
    ValueBelief,
    belief_advance,
    belief_update,
    final_estimate,
    private_value_init,
)
from .obi import OBIAgent, OBIState, Position, obi_act, obi_indicator

__all__ = [
    "BackgroundAgent", "InformedAgent", "OrderIntent", "ZIAgent", "informed_act", "zi_act",
    "PortfolioState", "TradingAgent", "mark_to_market",
    "DegeneratePrecisionError", "PrivateValues", "ValueBelief", "belief_advance", "belief_update",
    "final_estimate", "private_value_init",
    "OBIAgent", "OBIState", "Position", "obi_act", "obi_indicator",
]
