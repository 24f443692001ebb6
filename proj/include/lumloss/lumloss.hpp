#ifndef LUMLOSS_LUMLOSS_HPP
#define LUMLOSS_LUMLOSS_HPP

#include "checkpoint.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "gradcheck.hpp"
#include "harness.hpp"
#include "image.hpp"
#include "image_io.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "tinynet.hpp"
#include "trainer.hpp"

#endif
