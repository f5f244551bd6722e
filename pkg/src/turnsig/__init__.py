"""Path-signature features of interview turns for mental-health classification."""
from .errors import (ConfigError, DataError, InvalidInputError, LexiconError, ParseError,
                     ShapeError, TurnsigError)
from .estimators import L2LogisticRegression, PearsonSelector, SignatureFeaturizer
from .features import CNT, DIAL, GROUPS, LING, FeatureExtractor, impute_path
from .lexicon import Lexicon, LexiconKind, load_lexicon, load_lexicon_dir
from .pipeline import (ExperimentConfig, Task, permutation_null, render_report, run_ablation,
                       run_loocv, summarize_interview)
from .sigcore import (Signature, chen_product, levy_area, path_signature, signature_size,
                      tensor_exp)
from .synth import SynthSpec, generate
from .transcript import (Group, Interview, Speaker, SpeakerTurn, Subject, Token, load_dataset,
                         load_interview, save_interview, write_dataset)

__version__ = "0.1.0"

__all__ = [
    "CNT", "DIAL", "GROUPS", "LING", "ConfigError", "DataError", "ExperimentConfig",
    "FeatureExtractor", "Group", "InvalidInputError", "Interview", "L2LogisticRegression",
    "Lexicon", "LexiconError", "LexiconKind", "ParseError", "PearsonSelector", "ShapeError",
    "Signature", "SignatureFeaturizer", "Speaker", "SpeakerTurn", "Subject", "SynthSpec",
    "Task", "Token", "TurnsigError", "chen_product", "generate", "impute_path", "levy_area",
    "load_dataset", "load_interview", "load_lexicon", "load_lexicon_dir", "path_signature",
    "permutation_null", "render_report", "run_ablation", "run_loocv", "save_interview",
    "signature_size", "summarize_interview", "tensor_exp", "write_dataset",
]
