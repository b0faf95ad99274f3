"""
The expression language for control-map entries.

Entries are parsed once into a small AST.  Evaluation on dual numbers gives
exact gradients, which is what the control Jacobians are built from.
"""

from lielinear.expr import ExprSyntaxError, evaluate, evaluate_dual, parse_expression, to_source

e = parse_expression("sin(u1 + pi/2) * exp(-u2) / (2 + cos(u1))", m=2)
print(e)
print("printed back:", to_source(e))
print("value at (0.3, 0.1):", evaluate(e, [0.3, 0.1]))

d = evaluate_dual(e, [0.3, 0.1])
print("gradient:", d.derivative)

h = 1e-6
fd = [(evaluate(e, [0.3 + h, 0.1]) - evaluate(e, [0.3 - h, 0.1])) / (2 * h),
      (evaluate(e, [0.3, 0.1 + h]) - evaluate(e, [0.3, 0.1 - h])) / (2 * h)]
print("central differences:", fd)

## Errors carry the byte offset of the offending token
for bad in ("1 + tan(u1)", "u3", "2 * (u1"):
    try:
        parse_expression(bad, m=2)
    except ExprSyntaxError as exc:
        print(f"{bad!r}: {exc}")
