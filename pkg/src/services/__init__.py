from .protocols import FeatureEncoder as FeatureEncoder
from .protocols import ImageFunction as ImageFunction
from .protocols import ParameterSource as ParameterSource
from .protocols import Upscaler as Upscaler
