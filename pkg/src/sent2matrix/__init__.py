"""2-D character-matrix sentence encodings with a from-scratch CNN stack.

Sentences become stacks of 26 x m one-hot word matrices under one of three
padding layouts (zero, cyclic, serpentine); a small float64 tensor engine
with reverse-mode gradients and Adam trains 2-D dense-block classifiers on
them, alongside word- and character-level 1-D baselines.
"""
from .data import BUILTIN_DATASETS, DataError, DatasetSpec, builtin_spec, load_dataset
from .encode import (
    CHAR_DIM,
    EncodingError,
    encode_batch,
    position_channels,
    sentence_char_matrix,
    sentence_tensor,
    word_matrix,
)
from .harness import (
    Experiment,
    Metrics,
    TrainParams,
    TrainReport,
    compare_paddings,
    evaluate,
    load_experiment,
    train,
)
from .models import (
    ConfigError,
    ModelConfig,
    build_char_cnn,
    build_sent2matrix,
    build_word_cnn,
    predict,
)
from .padding import (
    PaddingError,
    STRATEGIES,
    fold_render,
    pad_cyclic,
    pad_sentence_slices,
    pad_zero,
    serpentine_sequence,
)
from .text import CHAR_VOCAB, TokenizedSentence, build_word_vocab, normalize, tokenize

__version__ = "0.1.0"
