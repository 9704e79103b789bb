#!/usr/bin/env python3
"""Tiny ONNX classifiers used by the backend tests, plus reference outputs.

gap_linear_1000.onnx: global average pool -> linear(3, 1000), 1x3x224x224 in.
gap_linear_10.onnx:   same graph with 10 outputs (shape-mismatch fixture).
expected.json:        torch outputs for two constant-per-channel inputs.
"""
import json
import os
import warnings

import torch
import torch.nn as nn

warnings.filterwarnings("ignore")
HERE = os.path.dirname(os.path.abspath(__file__))


class GapLinear(nn.Module):
    def __init__(self, n):
        super().__init__()
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.fc = nn.Linear(3, n)

    def forward(self, x):
        return self.fc(torch.flatten(self.pool(x), 1))


def export(n, name):
    torch.manual_seed(7)
    m = GapLinear(n).eval()
    torch.onnx.export(m, torch.zeros(1, 3, 224, 224), os.path.join(HERE, name),
                      dynamo=False, opset_version=13, input_names=["input"], output_names=["logits"])
    return m


m = export(1000, "gap_linear_1000.onnx")
export(10, "gap_linear_10.onnx")
cases = []
for chans in ([0.0, 0.0, 0.0], [-1.0, 0.5, 2.0]):
    x = torch.tensor(chans).view(1, 3, 1, 1).expand(1, 3, 224, 224).contiguous()
    with torch.no_grad():
        y = m(x)[0]
    cases.append({"channels": chans, "argmax": int(y.argmax()), "logits_head": [float(v) for v in y[:8]],
                  "logits_sum": float(y.double().sum())})
with open(os.path.join(HERE, "expected.json"), "w") as f:
    json.dump(cases, f, indent=2)
    f.write("\n")
