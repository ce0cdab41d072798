#pragma once

#include "eri/analytics.hpp"
#include "eri/backtest.hpp"
#include "eri/csv.hpp"
#include "eri/eri_optimizer.hpp"
#include "eri/error.hpp"
#include "eri/market_data.hpp"
#include "eri/mv_optimizer.hpp"
#include "eri/random.hpp"
#include "eri/report.hpp"
#include "eri/simplex.hpp"
#include "eri/strategies.hpp"
#include "eri/synthetic.hpp"
#include "eri/tail_model.hpp"
#include "eri/weights.hpp"
