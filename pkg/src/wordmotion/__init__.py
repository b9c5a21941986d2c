"""Person-specific video falsification detection from word-conditioned
facial motion.

The pipeline parses per-frame facial motion tracks and word alignments,
reduces each spoken unit to a 25-D range-of-motion vector, trains one small
logistic regression per unit and person, and scores test clips with the
geometric mean of the per-unit real-probabilities. The synth module builds
seeded corpora with known planted signatures, so all of it is verifiable
end to end without real video data.
"""

from wordmotion._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
