#!/usr/bin/env python3
"""Export torchvision backbones into the dermabench weight cache.

    python3 tools/convert_torchvision_weights.py --out ~/.cache/dermabench
    python3 tools/convert_torchvision_weights.py --out DIR --random --seed 3 \
        --reference DIR/ref

Without --random the ImageNet weights are fetched through torchvision's own
download mechanism. With --reference, a full classifier checkpoint plus an
input batch and the matching torchvision probabilities are written as well,
for parity testing of the C++ implementation.
"""

import argparse
import datetime
import json
import os
import struct
import sys
import tempfile

import numpy as np
import torch
import torchvision

MAGIC = b"DRMBENCH"
FORMAT_VERSION = 1

BACKBONES = {
    "resnet101": ("resnet101", ("fc.",)),
    "densenet169": ("densenet169", ("classifier.",)),
    "efficientnet": ("efficientnet_b0", ("classifier.",)),
    "inceptionv3": ("inception_v3", ("fc.", "AuxLogits.")),
}

PREPROCESSING = {
    "imagenet_mean_std": ([0.485, 0.456, 0.406], [0.229, 0.224, 0.225]),
    "inception_symmetric": ([0.5, 0.5, 0.5], [0.5, 0.5, 0.5]),
}


def preprocessing_for(key):
    scheme = "inception_symmetric" if key == "inceptionv3" else "imagenet_mean_std"
    mean, std = PREPROCESSING[scheme]
    return {"scheme": scheme, "input_range": "[0, 1] RGB", "mean": mean, "std": std}


def fnv1a64(data):
    try:
        import numba

        @numba.njit(cache=False)
        def _hash(buf):
            h = np.uint64(0xCBF29CE484222325)
            prime = np.uint64(0x100000001B3)
            for b in buf:
                h ^= np.uint64(b)
                h *= prime
            return h

        return int(_hash(np.frombuffer(data, dtype=np.uint8)))
    except ImportError:
        h = 0xCBF29CE484222325
        for b in data:
            h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
        return h


def write_container(path, metadata, tensors):
    payload = bytearray()
    table = []
    for name, t in tensors:
        t = t.detach().cpu().contiguous()
        if t.dtype == torch.float32:
            dtype = "f32"
        elif t.dtype == torch.int64:
            dtype = "i64"
        else:
            raise ValueError(f"unsupported dtype {t.dtype} for {name}")
        raw = t.numpy().astype(t.numpy().dtype.newbyteorder("<"), copy=False).tobytes()
        table.append({"name": name, "dtype": dtype, "shape": list(t.shape),
                      "offset": len(payload), "nbytes": len(raw)})
        payload += raw
    metadata = dict(metadata)
    metadata["format_version"] = FORMAT_VERSION
    metadata["payload_bytes"] = len(payload)
    metadata["tensors"] = table
    header = json.dumps(metadata, separators=(",", ":")).encode("utf-8")
    body = header + bytes(payload)
    blob = MAGIC + struct.pack("<IQ", FORMAT_VERSION, len(header)) + body
    blob += struct.pack("<Q", fnv1a64(body))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    with os.fdopen(fd, "wb") as f:
        f.write(blob)
    os.chmod(tmp, 0o644)
    os.replace(tmp, path)


def build(key, random_init):
    name, _ = BACKBONES[key]
    kwargs = {}
    if key == "inceptionv3":
        kwargs = {"aux_logits": False, "init_weights": True, "transform_input": False}
    weights = None if random_init else "DEFAULT"
    if key == "inceptionv3" and not random_init:
        kwargs["aux_logits"] = True
    model = getattr(torchvision.models, name)(weights=weights, **kwargs)
    return model.eval()


def backbone_state(key, model):
    _, excluded = BACKBONES[key]
    return [(k, v) for k, v in model.state_dict().items()
            if not any(k.startswith(p) for p in excluded)]


def perturb_batch_norm(model, generator):
    # Fresh models have trivial running statistics; give them real ones so
    # parity checks exercise the inference-mode normalisation.
    with torch.no_grad():
        for m in model.modules():
            if isinstance(m, torch.nn.BatchNorm2d):
                m.running_mean.copy_(torch.randn(m.running_mean.shape, generator=generator) * 0.1)
                m.running_var.copy_(torch.rand(m.running_var.shape, generator=generator) + 0.5)
                m.weight.copy_(torch.rand(m.weight.shape, generator=generator) + 0.5)
                m.bias.copy_(torch.randn(m.bias.shape, generator=generator) * 0.1)


def now():
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def features(key, model, x):
    if key == "resnet101":
        m = model
        x = m.maxpool(m.relu(m.bn1(m.conv1(x))))
        return m.layer4(m.layer3(m.layer2(m.layer1(x))))
    if key == "densenet169":
        return torch.relu(model.features(x))
    if key == "efficientnet":
        return model.features(x)
    m = model
    for name in ["Conv2d_1a_3x3", "Conv2d_2a_3x3", "Conv2d_2b_3x3", "maxpool1",
                 "Conv2d_3b_1x1", "Conv2d_4a_3x3", "maxpool2", "Mixed_5b", "Mixed_5c",
                 "Mixed_5d", "Mixed_6a", "Mixed_6b", "Mixed_6c", "Mixed_6d", "Mixed_6e",
                 "Mixed_7a", "Mixed_7b", "Mixed_7c"]:
        x = getattr(m, name)(x)
    return x


def write_reference(key, model, out_dir, seed):
    gen = torch.Generator().manual_seed(seed + 1)
    feats = features(key, model, torch.zeros(1, 3, 224, 224)).shape[1]
    head = torch.nn.Linear(feats, 2)
    with torch.no_grad():
        head.weight.copy_(torch.randn(head.weight.shape, generator=gen) * 0.05)
        head.bias.copy_(torch.randn(head.bias.shape, generator=gen) * 0.05)
    images = torch.rand(2, 224, 224, 3, generator=gen)
    pp = preprocessing_for(key)
    x = (images - torch.tensor(pp["mean"])) / torch.tensor(pp["std"])
    with torch.no_grad():
        probs = torch.softmax(head(features(key, model, x.permute(0, 3, 1, 2)).mean((2, 3))), 1)

    tensors = [("backbone." + k, v) for k, v in backbone_state(key, model)]
    tensors += [("head.weight", head.weight), ("head.bias", head.bias)]
    write_container(os.path.join(out_dir, f"{key}.dbck"), {
        "kind": "checkpoint", "backbone_id": key, "head_seed": seed,
        "freeze_policy": "full", "weight_source": "pretrained",
        "preprocessing_descriptor": pp, "created_at": now(),
        "train_config_fingerprint": "",
    }, tensors)
    images.numpy().astype("<f4").tofile(os.path.join(out_dir, f"{key}-input.f32"))
    probs.numpy().astype("<f8").tofile(os.path.join(out_dir, f"{key}-expected.f64"))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="weight cache directory")
    parser.add_argument("--backbones", nargs="*", default=list(BACKBONES))
    parser.add_argument("--random", action="store_true",
                        help="seeded random weights instead of ImageNet weights")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--reference", help="also write parity fixtures here")
    args = parser.parse_args()

    torch.set_grad_enabled(False)
    for key in args.backbones:
        if key not in BACKBONES:
            sys.exit(f"unknown backbone {key!r}; valid: {', '.join(BACKBONES)}")
        torch.manual_seed(args.seed)
        model = build(key, args.random)
        if args.random:
            perturb_batch_norm(model, torch.Generator().manual_seed(args.seed))
        write_container(os.path.join(args.out, f"{key}.dbw"), {
            "kind": "backbone_weights", "backbone_id": key,
            "preprocessing_descriptor": preprocessing_for(key), "created_at": now(),
            "source": "torchvision " + torchvision.__version__ +
                      (" random" if args.random else " ImageNet"),
        }, backbone_state(key, model))
        if args.reference:
            write_reference(key, model, args.reference, args.seed)
        print(f"{key}: written")
        del model


if __name__ == "__main__":
    main()
