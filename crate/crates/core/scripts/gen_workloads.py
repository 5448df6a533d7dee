#!/usr/bin/env python3
"""Generate the shipped workload descriptors under data/workloads/.

Layer shapes follow the standard ImageNet / reference configurations of each
network (torchvision for the CNNs, ViT-B/16, MobileBERT, GPT-2 Medium).
Conv layers are lowered im2col-style: fan_in = k*k*C_in, fan_out = C_out,
macs = fan_in * fan_out * H_out * W_out. Depthwise convs use fan_in = k*k,
fan_out = C. Transformer blocks are represented by their projection matrices;
the per-token dynamic matmuls (QK^T and AV) are folded into the macs of the
qkv projection, which carries kind "attention". Embedding lookups are not
matmuls and are omitted; GPT-2's LM head is kept.

The output is derived data. Regenerate with:

    python3 scripts/gen_workloads.py data/workloads
"""

import json
import os
import sys


class Net:
    def __init__(self, name):
        self.name = name
        self.layers = []

    def conv(self, name, k, cin, cout, h_in, stride=1, pad=None):
        if pad is None:
            pad = k // 2
        h_out = (h_in + 2 * pad - k) // stride + 1
        fan_in = k * k * cin
        self.layers.append({
            "name": name,
            "kind": "conv",
            "fan_in": fan_in,
            "fan_out": cout,
            "in_activations": h_in * h_in * cin,
            "out_activations": h_out * h_out * cout,
        })
        return h_out

    def dwconv(self, name, k, c, h_in, stride=1):
        pad = k // 2
        h_out = (h_in + 2 * pad - k) // stride + 1
        self.layers.append({
            "name": name,
            "kind": "depthwise_conv",
            "fan_in": k * k,
            "fan_out": c,
            "in_activations": h_in * h_in * c,
            "out_activations": h_out * h_out * c,
        })
        return h_out

    def fc(self, name, fin, fout, positions=1, kind="fc", extra_macs=0):
        layer = {
            "name": name,
            "kind": kind,
            "fan_in": fin,
            "fan_out": fout,
            "in_activations": positions * fin,
            "out_activations": positions * fout,
        }
        if extra_macs:
            layer["macs"] = fin * fout * positions + extra_macs
        self.layers.append(layer)

    def to_json(self):
        return {"name": self.name, "layers": self.layers}


def resnet18():
    n = Net("resnet18")
    h = n.conv("conv1", 7, 3, 64, 224, stride=2, pad=3)
    h = (h + 2 - 3) // 2 + 1  # maxpool 3x3 s2 p1
    cin = 64
    for stage, (width, stride) in enumerate([(64, 1), (128, 2), (256, 2), (512, 2)], start=1):
        for block in range(2):
            s = stride if block == 0 else 1
            h_in = h
            h = n.conv(f"layer{stage}.{block}.conv1", 3, cin, width, h_in, stride=s)
            n.conv(f"layer{stage}.{block}.conv2", 3, width, width, h)
            if s != 1 or cin != width:
                n.conv(f"layer{stage}.{block}.downsample", 1, cin, width, h_in, stride=s, pad=0)
            cin = width
    n.fc("fc", 512, 1000)
    return n


def resnet50():
    n = Net("resnet50")
    h = n.conv("conv1", 7, 3, 64, 224, stride=2, pad=3)
    h = (h + 2 - 3) // 2 + 1
    cin = 64
    for stage, (width, blocks, stride) in enumerate(
        [(64, 3, 1), (128, 4, 2), (256, 6, 2), (512, 3, 2)], start=1
    ):
        for block in range(blocks):
            s = stride if block == 0 else 1
            h_in = h
            p = f"layer{stage}.{block}"
            n.conv(f"{p}.conv1", 1, cin, width, h_in, pad=0)
            h = n.conv(f"{p}.conv2", 3, width, width, h_in, stride=s)
            n.conv(f"{p}.conv3", 1, width, width * 4, h, pad=0)
            if block == 0:
                n.conv(f"{p}.downsample", 1, cin, width * 4, h_in, stride=s, pad=0)
            cin = width * 4
    n.fc("fc", 2048, 1000)
    return n


def vgg16():
    n = Net("vgg16")
    h = 224
    cin = 3
    cfg = [[64, 64], [128, 128], [256, 256, 256], [512, 512, 512], [512, 512, 512]]
    idx = 0
    for block in cfg:
        for cout in block:
            h = n.conv(f"conv{idx}", 3, cin, cout, h)
            cin = cout
            idx += 1
        h //= 2
    n.fc("fc1", 512 * 7 * 7, 4096)
    n.fc("fc2", 4096, 4096)
    n.fc("fc3", 4096, 1000)
    return n


def alexnet():
    n = Net("alexnet")
    h = n.conv("conv1", 11, 3, 64, 224, stride=4, pad=2)
    h = (h - 3) // 2 + 1
    h = n.conv("conv2", 5, 64, 192, h, pad=2)
    h = (h - 3) // 2 + 1
    h = n.conv("conv3", 3, 192, 384, h)
    h = n.conv("conv4", 3, 384, 256, h)
    h = n.conv("conv5", 3, 256, 256, h)
    n.fc("fc1", 256 * 6 * 6, 4096)
    n.fc("fc2", 4096, 4096)
    n.fc("fc3", 4096, 1000)
    return n


def make_divisible(v, divisor=8):
    new_v = max(divisor, int(v + divisor / 2) // divisor * divisor)
    if new_v < 0.9 * v:
        new_v += divisor
    return new_v


def mobilenetv3():
    # MobileNetV3-Large: (kernel, expanded, out, squeeze-excite, stride)
    cfg = [
        (3, 16, 16, False, 1),
        (3, 64, 24, False, 2),
        (3, 72, 24, False, 1),
        (5, 72, 40, True, 2),
        (5, 120, 40, True, 1),
        (5, 120, 40, True, 1),
        (3, 240, 80, False, 2),
        (3, 200, 80, False, 1),
        (3, 184, 80, False, 1),
        (3, 184, 80, False, 1),
        (3, 480, 112, True, 1),
        (3, 672, 112, True, 1),
        (5, 672, 160, True, 2),
        (5, 960, 160, True, 1),
        (5, 960, 160, True, 1),
    ]
    n = Net("mobilenetv3")
    h = n.conv("stem", 3, 3, 16, 224, stride=2)
    cin = 16
    for i, (k, exp, out, se, s) in enumerate(cfg):
        p = f"block{i}"
        if exp != cin:
            n.conv(f"{p}.expand", 1, cin, exp, h, pad=0)
        h = n.dwconv(f"{p}.dw", k, exp, h, stride=s)
        if se:
            sq = make_divisible(exp // 4)
            n.fc(f"{p}.se.reduce", exp, sq)
            n.fc(f"{p}.se.expand", sq, exp)
        n.conv(f"{p}.project", 1, exp, out, h, pad=0)
        cin = out
    n.conv("head.conv", 1, 160, 960, h, pad=0)
    n.fc("head.fc1", 960, 1280)
    n.fc("head.fc2", 1280, 1000)
    return n


def densenet201():
    n = Net("densenet201")
    growth, bn_size = 32, 4
    h = n.conv("conv0", 7, 3, 64, 224, stride=2, pad=3)
    h = (h + 2 - 3) // 2 + 1
    c = 64
    blocks = (6, 12, 48, 32)
    for b, layers in enumerate(blocks, start=1):
        for l in range(layers):
            p = f"denseblock{b}.layer{l}"
            n.conv(f"{p}.conv1", 1, c, bn_size * growth, h, pad=0)
            n.conv(f"{p}.conv2", 3, bn_size * growth, growth, h)
            c += growth
        if b != len(blocks):
            n.conv(f"transition{b}.conv", 1, c, c // 2, h, pad=0)
            c //= 2
            h //= 2
    n.fc("classifier", c, 1000)
    return n


def attention_block(n, p, d, seq, ffn, heads_dim=None):
    # QK^T and AV: two seq x seq x d matmuls per block.
    dynamic = 2 * seq * seq * d
    n.fc(f"{p}.qkv", d, 3 * d, positions=seq, kind="attention", extra_macs=dynamic)
    n.fc(f"{p}.proj", d, d, positions=seq)
    n.fc(f"{p}.fc1", d, ffn, positions=seq)
    n.fc(f"{p}.fc2", ffn, d, positions=seq)


def vit():
    n = Net("vit")
    d, seq, depth = 768, 197, 12
    n.conv("patch_embed", 16, 3, d, 224, stride=16, pad=0)
    for i in range(depth):
        attention_block(n, f"block{i}", d, seq, 4 * d)
    n.fc("head", d, 1000)
    return n


def gpt2_medium():
    n = Net("gpt2_medium")
    d, seq, depth, vocab = 1024, 1024, 24, 50257
    for i in range(depth):
        attention_block(n, f"h{i}", d, seq, 4 * d)
    n.fc("lm_head", d, vocab, positions=seq)
    return n


def mobilebert():
    n = Net("mobilebert")
    hidden, inner, seq, depth, ffn = 512, 128, 128, 24, 512
    n.fc("embedding.transform", 3 * 128, hidden, positions=seq)
    for i in range(depth):
        p = f"layer{i}"
        n.fc(f"{p}.bottleneck.input", hidden, inner, positions=seq)
        n.fc(f"{p}.bottleneck.attention", hidden, inner, positions=seq)
        dynamic = 2 * seq * seq * inner
        n.fc(f"{p}.attention.qk", inner, 2 * inner, positions=seq, kind="attention",
             extra_macs=dynamic)
        n.fc(f"{p}.attention.value", hidden, inner, positions=seq)
        n.fc(f"{p}.attention.output", inner, inner, positions=seq)
        for f in range(4):
            n.fc(f"{p}.ffn{f}.intermediate", inner, ffn, positions=seq)
            n.fc(f"{p}.ffn{f}.output", ffn, inner, positions=seq)
        n.fc(f"{p}.bottleneck.output", inner, hidden, positions=seq)
    n.fc("pooler", hidden, hidden)
    n.fc("classifier", hidden, 2)
    return n


NETS = [resnet18, vgg16, alexnet, mobilenetv3, resnet50, densenet201, vit, mobilebert, gpt2_medium]


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data/workloads"
    os.makedirs(out_dir, exist_ok=True)
    for make in NETS:
        net = make()
        path = os.path.join(out_dir, f"{net.name}.json")
        with open(path, "w") as f:
            json.dump(net.to_json(), f, indent=1)
            f.write("\n")
        weights = sum(l["fan_in"] * l["fan_out"] for l in net.layers)
        largest = max(l["fan_in"] * l["fan_out"] for l in net.layers)
        print(f"{net.name:14s} layers={len(net.layers):4d} weights={weights:>12,d} largest={largest:>12,d}")

    sets = {
        "default4.json": ["resnet18", "vgg16", "alexnet", "mobilenetv3"],
        "extended9.json": [m().name for m in NETS],
    }
    for fname, names in sets.items():
        with open(os.path.join(out_dir, fname), "w") as f:
            json.dump({"workloads": [f"{n}.json" for n in names]}, f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()
