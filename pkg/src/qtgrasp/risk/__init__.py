from .distortions import NEUTRAL as NEUTRAL
from .distortions import RiskKind as RiskKind
from .distortions import RiskMetricSpec as RiskMetricSpec
from .distortions import distort as distort
from .distortions import distort_vector as distort_vector
from .distortions import distortion_weights as distortion_weights
from .distortions import parse_risk as parse_risk
from .scoring import MEAN as MEAN
from .scoring import ScoreFn as ScoreFn
from .scoring import ScoreKind as ScoreKind
from .scoring import score as score
