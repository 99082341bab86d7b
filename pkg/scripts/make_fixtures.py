#!/usr/bin/env python3
"""
Write a synthetic keypoint matching problem: source points, target points
(source rows permuted and linearly transformed) and the true correspondence.
"""
import argparse
import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from core.instances import generate_instance
from core.matrix import write_matrix
from services.csv_service import write_correspondence


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=40)
    parser.add_argument("--attributes", type=int, default=0,
                        help="extra linear attribute columns beyond the two coordinates")
    parser.add_argument("--noise", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--prefix", default="keypoints")
    args = parser.parse_args()

    k = 2 + args.attributes
    rotation = np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
    transform = np.eye(k)
    transform[:2, :2] = rotation @ np.diag([1.5, 0.8])
    instance = generate_instance(
        args.points, k, k, args.noise, seed=args.seed, x_star=transform
    )

    write_matrix(f"{args.prefix}_source.txt", instance.a, header=["synthetic keypoints"])
    write_matrix(f"{args.prefix}_target.txt", instance.y, header=[f"noise sigma {args.noise:g}"])
    write_matrix(f"{args.prefix}_transform.txt", instance.x_star)
    write_correspondence(f"{args.prefix}_truth.csv", instance.arrangement)
    print(f"Wrote {args.prefix}_{{source,target,transform}}.txt and {args.prefix}_truth.csv")


if __name__ == "__main__":
    main()
