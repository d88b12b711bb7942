# Copyright 2026 The herdsynth Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Synthetic herd datasets: scene layout, mock rendering, labels, augmentation, metrics."""

from herdsynth._core import (
    HerdsynthError,
    Manifest,
    Scene,
    SceneConfig,
    aggregate,
    annotate,
    average_precision,
    bbox_ratio_cdf,
    convert_yolo,
    crop_region,
    generate_scene,
    iou,
    mask_to_box,
    merge,
    pck,
    render,
    run_cli,
    scale_mask,
    split,
    version,
)

__version__ = version()

__all__ = [
    "HerdsynthError",
    "Manifest",
    "Scene",
    "SceneConfig",
    "aggregate",
    "annotate",
    "average_precision",
    "bbox_ratio_cdf",
    "convert_yolo",
    "crop_region",
    "generate_scene",
    "iou",
    "mask_to_box",
    "merge",
    "pck",
    "render",
    "run_cli",
    "scale_mask",
    "split",
    "version",
]
