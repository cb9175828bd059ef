"""Dataset synthesis: lexicon, primitives, compositional instances, splits and streams."""

from .compositional import (
    Dataset,
    assemble_compositional,
    build_dataset,
    compose_instance,
    decompose,
    default_counts,
)
from .lexicon import Lexicon, build_lexicon, pseudo_words
from .primitives import generate_primitive_nli, realize_nli, realize_veridical
from .relexicalize import Relexicalized, build_token_map, relexicalize, relexicalize_split
from .splits import ninefold_split, verify_split
from .streams import (
    CURRICULUM_ORDERS,
    NLI_STAGE_TYPES,
    VERIDICAL_STAGE_TYPES,
    build_curriculum_stage,
    build_stream,
)

__all__ = [
    "Dataset",
    "Lexicon",
    "Relexicalized",
    "CURRICULUM_ORDERS",
    "NLI_STAGE_TYPES",
    "VERIDICAL_STAGE_TYPES",
    "assemble_compositional",
    "build_curriculum_stage",
    "build_dataset",
    "build_lexicon",
    "build_stream",
    "build_token_map",
    "compose_instance",
    "decompose",
    "default_counts",
    "generate_primitive_nli",
    "ninefold_split",
    "pseudo_words",
    "realize_nli",
    "realize_veridical",
    "relexicalize",
    "relexicalize_split",
    "verify_split",
]
