"""Evaluate small arithmetic expressions such as ``log(alpha)/log(5)`` into balls.

Only literals, the named constants below, + - * / **int, and the functions
log, exp, sqrt and abs are accepted; anything else is a ValueError.
"""
from __future__ import annotations

import ast
from fractions import Fraction

from . import ballreal as br
from .ballreal import BallReal, ConstantId

_NAMES = {
    "alpha": ConstantId.ALPHA,
    "abs_beta": ConstantId.ABS_BETA,
    "sqrt5": ConstantId.SQRT5,
}
_FUNCS = {"log": br.log, "exp": br.exp, "sqrt": br.sqrt, "abs": abs}


def evaluate(text: str, bits: int) -> BallReal:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}") from exc
    return _eval(tree.body, text, bits)


def _eval(node, text, bits) -> BallReal:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        # re-read the literal so 0.156 stays exactly 156/1000
        src = ast.get_source_segment(text, node) or repr(node.value)
        return BallReal.exact(Fraction(src.replace("_", "")), bits)
    if isinstance(node, ast.Name):
        if node.id not in _NAMES:
            raise ValueError(f"unknown name {node.id!r}")
        return br.constant(_NAMES[node.id], bits)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, text, bits)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left = _eval(node.left, text, bits)
        if isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                raise ValueError("exponents must be integer literals")
            return left ** node.right.value
        right = _eval(node.right, text, bits)
        ops = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
               ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b}
        for op_type, fn in ops.items():
            if isinstance(node.op, op_type):
                return fn(left, right)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id} takes one argument")
        return _FUNCS[node.func.id](_eval(node.args[0], text, bits))
    raise ValueError(f"unsupported expression element: {ast.dump(node)}")
