#pragma once

#include <gtest/gtest.h>

#include "mmc/error.hpp"

// Asserts that `stmt` throws mmc::Error carrying `expected_code`.
#define EXPECT_MMC_ERROR(stmt, expected_code)                                         \
    do {                                                                              \
        try {                                                                         \
            stmt;                                                                     \
            ADD_FAILURE() << "expected " #expected_code " from " #stmt;               \
        } catch (const mmc::Error& mmc_err_) {                                        \
            EXPECT_EQ(mmc_err_.code(), expected_code) << mmc_err_.what();             \
        }                                                                             \
    } while (0)
