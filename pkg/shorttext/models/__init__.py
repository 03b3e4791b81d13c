"""
Models package initialization
"""
from shorttext.models.encoder import Encoder, EncoderOutput, apply_freeze, classify_cls, cls_ladder
from shorttext.models.lstm import LSTMCell, LSTMLayer, LstmState, lstm_cell_step, run_word_lstm, run_sentence_lstm
from shorttext.models.fusion import clause_repr, clause_fuse, assemble_sentence_features
from shorttext.models.head import ClassifierHead, class_probs, loss, max_pool_time, predict_label
from shorttext.models.classifier import HierarchicalClassifier
