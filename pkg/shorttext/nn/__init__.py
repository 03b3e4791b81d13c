"""
Numerics core: tensors, reverse-mode differentiation, optimisation
"""
from shorttext.nn.tensor import Tensor, Parameter, Tape, backward, current_tape
from shorttext.nn.rng import Rng
from shorttext.nn.module import Module, Linear, LayerNorm, Embedding
from shorttext.nn.gradcheck import grad_check, GradCheckReport
from shorttext.nn.optim import SGD, sgd_step, clip_grads
from shorttext.nn import ops
