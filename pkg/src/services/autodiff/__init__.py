from .tensor import GradientMap as GradientMap
from .tensor import GradTape as GradTape
from .tensor import Tensor as Tensor
from .tensor import backward as backward
from .tensor import default_dtype as default_dtype
from .tensor import precision as precision
