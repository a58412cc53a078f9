///////////////////////////////////////////////////////////////////////////////
// kalman.hpp: constant-velocity Kalman filter over box state
//
// State: [cx, cy, w, h, vcx, vcy, vw, vh] (px, px/frame), dt = 1 frame.
// Measurement: [cx, cy, w, h], H selects the first four state components.
//
//   P0 = diag(r, r, r, r, v0, v0, v0, v0)
//   Q  = diag(qp, qp, qp, qp, qv, qv, qv, qv)
//   R  = r * I4
//
// with r = measurement_noise, v0 = initial_velocity_variance,
// qp = process_noise_pos, qv = process_noise_vel.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skitrack/core.hpp"

namespace skitrack::kalman
{

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasVector = Eigen::Matrix<double, 4, 1>;
using MeasMatrix = Eigen::Matrix<double, 4, 4>;

struct KalmanParams
{
  double process_noise_pos = 1.0;
  double process_noise_vel = 0.1;
  double measurement_noise = 1.0;
  double initial_velocity_variance = 10.0;
  double gate_iou = 0.3;
};

inline void validate(const KalmanParams& p)
{
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.process_noise_pos) || !positive(p.process_noise_vel) ||
      !positive(p.measurement_noise) || !positive(p.initial_velocity_variance))
  {
    throw ConfigError("kalman: all noise terms must be finite and > 0");
  }
  if (!(p.gate_iou >= 0.0 && p.gate_iou <= 1.0))
  {
    throw ConfigError("kalman: gate_iou must lie in [0,1]");
  }
}

struct KalmanState
{
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Zero();

  BoundingBox box() const { return BoundingBox::from_center(mean(0), mean(1), mean(2), mean(3)); }
};

inline MeasVector encode(const BoundingBox& b)
{
  return MeasVector(b.cx(), b.cy(), b.w, b.h);
}

inline StateMatrix transition()
{
  StateMatrix f = StateMatrix::Identity();
  f.topRightCorner<4, 4>().setIdentity();
  return f;
}

inline StateMatrix process_noise(const KalmanParams& p)
{
  StateVector d;
  d << p.process_noise_pos, p.process_noise_pos, p.process_noise_pos, p.process_noise_pos,
    p.process_noise_vel, p.process_noise_vel, p.process_noise_vel, p.process_noise_vel;
  return d.asDiagonal();
}

inline void require_finite(const KalmanState& s)
{
  if (!s.mean.allFinite() || !s.covariance.allFinite())
  {
    throw NumericalError("kalman: non-finite state");
  }
}

inline KalmanState kf_init(const BoundingBox& box, const KalmanParams& params)
{
  require_valid(box, "kalman init box");
  KalmanState s;
  s.mean.head<4>() = encode(box);
  StateVector d;
  const double r = params.measurement_noise;
  const double v = params.initial_velocity_variance;
  d << r, r, r, r, v, v, v, v;
  s.covariance = d.asDiagonal();
  return s;
}

inline KalmanState kf_predict(const KalmanState& s, const KalmanParams& params)
{
  require_finite(s);
  const StateMatrix f = transition();
  KalmanState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose() + process_noise(params);
  return out;
}

inline KalmanState kf_update(const KalmanState& s, const BoundingBox& z, const KalmanParams& params)
{
  require_finite(s);
  require_valid(z, "kalman measurement");

  // H picks rows 0..3, so H*P*H^T and P*H^T are plain blocks.
  const MeasMatrix innovation_cov =
    s.covariance.topLeftCorner<4, 4>() + params.measurement_noise * MeasMatrix::Identity();
  const Eigen::Matrix<double, 8, 4> pht = s.covariance.leftCols<4>();

  Eigen::LLT<MeasMatrix> llt(innovation_cov);
  if (llt.info() != Eigen::Success || !innovation_cov.allFinite())
  {
    throw NumericalError("kalman: innovation covariance is singular or not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(pht.transpose()).transpose();
  const MeasVector innovation = encode(z) - s.mean.head<4>();

  KalmanState out;
  out.mean = s.mean + gain * innovation;
  out.covariance = s.covariance - gain * pht.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  require_finite(out);
  return out;
}

/// Refine a single-skier track with detector boxes.
///
/// Per clip the filter starts fresh and initializes on the first frame where
/// the input track is present. After that, each frame: predict; update with
/// the highest-IoU detection whose IoU with the prediction is >= gate_iou, or
/// with the input box when none gates and the input is present. Presence and
/// confidence are copied from the input.
inline Track refine_single_skier(const Track& track, const SequenceManifest& manifest,
                                 const DetectionsByFrame& detections, const KalmanParams& params)
{
  validate(params);
  require_domain(track, manifest);
  static const std::vector<Detection> kNone;

  std::vector<FrameRecord> out;
  out.reserve(track.size());
  for (const auto& clip : manifest.clips)
  {
    std::optional<KalmanState> state;
    for (FrameIndex f = clip.start_frame; f <= clip.end_frame; ++f)
    {
      const FrameRecord& in = track.at(f);
      if (!state)
      {
        if (in.present)
        {
          state = kf_init(in.box, params);
        }
        out.push_back(in);
        continue;
      }

      KalmanState predicted = kf_predict(*state, params);
      const BoundingBox pbox = predicted.box();

      const auto it = detections.find(f);
      const auto& dets = it == detections.end() ? kNone : it->second;
      const Detection* best = nullptr;
      double best_iou = -1.0;
      if (pbox.valid())
      {
        for (const auto& d : dets)
        {
          const double v = iou(pbox, d.box);
          if (v >= params.gate_iou && v > best_iou)
          {
            best = &d;
            best_iou = v;
          }
        }
      }

      if (best)
      {
        state = kf_update(predicted, best->box, params);
      }
      else if (in.present)
      {
        state = kf_update(predicted, in.box, params);
      }
      else
      {
        state = predicted;
      }

      if (!in.present)
      {
        out.push_back(in);
        continue;
      }
      BoundingBox refined = state->box();
      out.push_back(FrameRecord::with_box(f, refined.valid() ? refined : in.box, in.confidence));
    }
  }
  return Track(track.sequence_id(), std::move(out));
}

}  // namespace skitrack::kalman
