#pragma once

#include "rsa/config.hpp"
#include "rsa/convolution.hpp"
#include "rsa/fft.hpp"
#include "rsa/io.hpp"
#include "rsa/kernel_estimation.hpp"
#include "rsa/manifold.hpp"
#include "rsa/metrics.hpp"
#include "rsa/parallel.hpp"
#include "rsa/pipeline.hpp"
#include "rsa/report.hpp"
#include "rsa/simulation.hpp"
#include "rsa/solvers.hpp"
#include "rsa/tensor.hpp"
#include "rsa/xk.hpp"
