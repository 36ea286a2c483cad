from .base import Annotator, annotate
from .bio import TAGS, BIOTag, bio_decode, bio_encode
from .registry import AnnotatorDescriptor, build_annotator
from .external import ExternalAdapterConfig, ExternalAnnotator, external_annotate
from .gazetteer import (
    GazetteerAnnotator,
    GazetteerLexicon,
    gazetteer_annotate,
    load_lexicon,
    load_lexicon_file,
)
from .perceptron import (
    PerceptronAnnotator,
    PerceptronModel,
    extract_features,
    load_model,
    load_model_file,
    perceptron_predict,
    perceptron_train,
    save_model,
    save_model_file,
)

__all__ = [
    "AnnotatorDescriptor",
    "build_annotator",
    "Annotator",
    "annotate",
    "TAGS",
    "BIOTag",
    "bio_decode",
    "bio_encode",
    "ExternalAdapterConfig",
    "ExternalAnnotator",
    "external_annotate",
    "GazetteerAnnotator",
    "GazetteerLexicon",
    "gazetteer_annotate",
    "load_lexicon",
    "load_lexicon_file",
    "PerceptronAnnotator",
    "PerceptronModel",
    "extract_features",
    "load_model",
    "load_model_file",
    "perceptron_predict",
    "perceptron_train",
    "save_model",
    "save_model_file",
]
