#pragma once

#include "nira/activation.hpp"
#include "nira/affine.hpp"
#include "nira/bounds.hpp"
#include "nira/errors.hpp"
#include "nira/eval.hpp"
#include "nira/extract.hpp"
#include "nira/fields.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"
#include "nira/math.hpp"
#include "nira/mesh.hpp"
#include "nira/paf.hpp"
#include "nira/raycast.hpp"
#include "nira/stats.hpp"
#include "nira/train.hpp"
#include "nira/weights_io.hpp"
