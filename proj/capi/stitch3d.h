/*
 * C interface to the two-view scene stitching library.
 *
 * All functions returning s3d_status set a thread-local error message
 * readable through s3d_last_error() on failure. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * _free function; strings returned through char** are released with
 * s3d_string_free().
 */

#ifndef STITCH3D_H
#define STITCH3D_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum s3d_status {
    S3D_OK = 0,
    S3D_ERROR_IO = 1,      /* file could not be read or written */
    S3D_ERROR_PARSE = 2,   /* malformed input */
    S3D_ERROR_INVALID = 3, /* argument or invariant violation */
    S3D_ERROR_SOLVE = 4,   /* every stitch candidate evaluation failed */
    S3D_ERROR_EVAL = 5,    /* evaluation precondition violated */
} s3d_status;

const char* s3d_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* s3d_last_error(void);

void s3d_string_free(char* text);

/* ------------------------------------------------------------------ */
/* Scene pairs                                                         */

typedef struct s3d_scene_pair s3d_scene_pair;

s3d_status s3d_scene_pair_load(const char* path, s3d_scene_pair** out);
s3d_status s3d_scene_pair_parse(const char* json_text, s3d_scene_pair** out);
void s3d_scene_pair_free(s3d_scene_pair* pair);

/* Number of objects in view 0 or 1; -1 on invalid arguments. */
int s3d_scene_pair_view_size(const s3d_scene_pair* pair, int view);
int s3d_scene_pair_has_ground_truth(const s3d_scene_pair* pair);

/* ------------------------------------------------------------------ */
/* Stitching                                                           */

typedef struct s3d_stitch_params {
    double lambda_similarity;       /* default 5 */
    double lambda_unmatched;        /* default 1 */
    double lambda_pose_rotation;    /* default 5 */
    double lambda_pose_translation; /* default 1 */
    double affinity_threshold;      /* default 0.5 */
    double edge_threshold;          /* occupancy threshold, default 0.5 */
    int samples;                    /* correspondence draws, default 128 */
    int top_rotations;              /* rotation bins searched, default 3 */
    int top_translations;           /* translation bins searched, default 10 */
    int max_edge_points;            /* per-object edge cloud cap, default 1000 */
    int threads;                    /* default 1; results identical for any value */
    uint64_t seed;                  /* default 0 */
} s3d_stitch_params;

void s3d_stitch_params_init(s3d_stitch_params* params);

typedef struct s3d_stitch_result s3d_stitch_result;

s3d_status s3d_stitch(const s3d_scene_pair* pair, const s3d_stitch_params* params,
                      s3d_stitch_result** out);
void s3d_stitch_result_free(s3d_stitch_result* result);

double s3d_stitch_result_objective(const s3d_stitch_result* result);

/* Chosen relative camera pose (maps view-1 coordinates to view-2). */
void s3d_stitch_result_pose(const s3d_stitch_result* result, double quat_wxyz[4],
                            double translation[3]);

int s3d_stitch_result_pair_count(const s3d_stitch_result* result);
s3d_status s3d_stitch_result_pair(const s3d_stitch_result* result, int index, int* view1_index,
                                  int* view2_index);
int s3d_stitch_result_merged_count(const s3d_stitch_result* result);

/* Full report (pose, correspondence, objective breakdown, merged scene). */
s3d_status s3d_stitch_result_to_json(const s3d_stitch_result* result, char** json_out);
s3d_status s3d_stitch_result_save(const s3d_stitch_result* result, const char* path);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

typedef struct s3d_eval_thresholds {
    double translation_max;  /* meters, default 1.0 */
    double scale_max;        /* mean |log2| units, default 0.2 */
    double rotation_max_rad; /* default pi/6 */
    double fscore_min;       /* default 0.25 */
    double fscore_tau;       /* default 0.05 */
} s3d_eval_thresholds;

void s3d_eval_thresholds_init(s3d_eval_thresholds* thresholds);

/*
 * Scores stitch reports against scene files with ground truth. Both paths
 * may be single .json files or directories whose sorted *.json entries
 * (manifest.json excluded) pair up positionally. The report covers
 * detection AP (joint + per-metric), correspondence AP (stitched vs raw
 * affinity), and relative-pose error tables for the stitched pose and the
 * raw top-1 bins. text_format != 0 renders a table instead of JSON.
 */
s3d_status s3d_evaluate(const char* predictions_path, const char* ground_truth_path,
                        const s3d_eval_thresholds* thresholds, int text_format, char** report_out);

/* ------------------------------------------------------------------ */
/* Synthetic benchmark generation                                      */

typedef struct s3d_generate_params {
    int scenes;                  /* default 5 */
    int objects;                 /* per scene, default 5 */
    int resolution;              /* voxel grid resolution, default 32 */
    int rotation_bins;           /* default 30 */
    int translation_bins;        /* default 60 */
    int corpus_size;             /* poses clustered into the bins, default 512 */
    double translation_noise;    /* meters, default 0 */
    double rotation_noise;       /* radians, default 0 */
    double scale_noise;          /* log units, default 0 */
    double embedding_noise;      /* radians, default 0 */
    double pose_top1_accuracy;   /* default 1 */
    double duplicate_shape_prob; /* default 0 */
    uint64_t seed;               /* default 0 */
    const char* bins_path;       /* optional bin-set file; NULL clusters internally */
} s3d_generate_params;

void s3d_generate_params_init(s3d_generate_params* params);

/* Writes scene_NNNN.json files plus manifest.json into out_dir. When
 * manifest_json_out is non-NULL it receives the manifest text. */
s3d_status s3d_generate(const s3d_generate_params* params, const char* out_dir,
                        char** manifest_json_out);

/* ------------------------------------------------------------------ */
/* Pose-bin clustering                                                 */

/* Clusters a pose corpus file into rotation/translation bin sets. */
s3d_status s3d_cluster_poses(const char* corpus_path, int rotation_bins, int translation_bins,
                             uint64_t seed, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* STITCH3D_H */
