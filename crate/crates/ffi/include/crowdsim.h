/* Observation layout version 1. All scalars are double.
 * obs_len = 6 + n_humans * (2 + 5 * (k + 1)).
 * Termination: 0 running, 1 goal, 2 collision, 3 timeout.
 * Negative return values signal failure; see crowdsim_last_error. */
#ifndef CROWDSIM_H
#define CROWDSIM_H

#include <stddef.h>
#include <stdint.h>

#define CROWDSIM_ERR_GENERAL (-1)
#define CROWDSIM_ERR_BUFFER (-2)

typedef struct Session crowdsim_session;

uint32_t crowdsim_abi_version(void);
crowdsim_session *crowdsim_create(const char *config_json, const char *scenario_json, uint64_t seed);
int64_t crowdsim_reset(crowdsim_session *h, uint64_t seed, double *out_obs, size_t len);
int32_t crowdsim_step(crowdsim_session *h, double v, double dtheta,
                      double *out_obs, size_t obs_len,
                      double *out_reward, int32_t *out_term,
                      double *out_human_rewards, size_t n_humans);
int64_t crowdsim_obs_len(crowdsim_session *h);
int64_t crowdsim_n_humans(crowdsim_session *h);
int32_t crowdsim_write_log(crowdsim_session *h, const char *path);
const char *crowdsim_last_error(void);
void crowdsim_destroy(crowdsim_session *h);

#endif
