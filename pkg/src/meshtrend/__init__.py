"""meshtrend - emergence analysis of newly added MeSH terms."""

__version__ = "0.1.0"
__license__ = "MIT"
__description__ = (
    "Trace new controlled-vocabulary terms through the literature, classify their "
    "emergence and predict which will become emerging topics"
)

from .config import RunConfig, load_config
from .core import EmergencePipeline
from .exceptions import MeshTrendError

__all__ = ["EmergencePipeline", "MeshTrendError", "RunConfig", "load_config"]
